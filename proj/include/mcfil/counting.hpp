#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mcfil/cnf.hpp"
#include "mcfil/rng.hpp"
#include "mcfil/solver.hpp"

namespace mcfil {

// Random parity constraint over a projection: each variable included with
// independent probability 1/2, rhs a uniform bit.
struct HashConstraint {
  std::vector<Var> vars;
  bool rhs = false;
};

struct CountConfig {
  SolverConfig solver;
  uint64_t seed = 0;
  // Stream tag + call index make parallel counts reproducible: every call
  // site passes a distinct (purpose, call_index) pair and joins by index.
  std::string purpose = "count";
  uint64_t call_index = 0;
};

struct CountEstimate {
  // Exact integer while it fits; cell_count * 2^k beyond that (the mantissa
  // is at most the pivot, so a long double holds it exactly).
  long double count = 0.0L;
  double epsilon = 0.0;
  double delta = 0.0;
  bool exact = false;
  // Solve budget ran out (or every estimation round failed); count invalid.
  bool unknown = false;

  uint64_t rounded() const;   // saturating integer view
  std::string str() const;    // decimal when small, "2^x" rendering when huge
};

// Cell-size threshold for a given multiplicative tolerance; 73 at the
// default epsilon = 0.8.
uint32_t pivot_for(double epsilon);

// Number of independent median rounds for a failure probability; rounded up
// to odd. 5 at the default delta = 0.2.
uint32_t rounds_for(double delta);

HashConstraint sample_hash(const std::vector<Var>& projection, RngStream& rng);

// Exact projected count by blocking-clause enumeration. |projection| <= 24.
CountEstimate count_exact(const CnfFormula& f,
                          const std::vector<Var>& projection,
                          const CountConfig& cfg);

// Hash-based approximate projected count: with probability >= 1-delta the
// result is within a (1+epsilon) factor of the true count. Falls back to the
// exact answer when the solution set fits under the pivot.
CountEstimate count_approx(const CnfFormula& f,
                           const std::vector<Var>& projection, double epsilon,
                           double delta, const CountConfig& cfg);

}  // namespace mcfil
