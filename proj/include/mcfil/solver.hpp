#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mcfil/bitvec.hpp"
#include "mcfil/cnf.hpp"

namespace mcfil {

enum class SolveStatus { kSat, kUnsat, kUnknown };

const char* status_name(SolveStatus s);

struct SolverConfig {
  uint64_t seed = 0;
  int64_t max_conflicts = -1;  // negative: unlimited
  double timeout_s = -1.0;     // negative: unlimited
  // Keep XOR clauses native (Gaussian elimination + parity propagation).
  // When false they are blasted to CNF before solving / serialization.
  bool xor_native = true;
  // Non-empty: shell out per solve. "{cnf_path}" in the string is replaced
  // by the instance path; otherwise the path is appended as the last arg.
  // The command must print "s SATISFIABLE"/"s UNSATISFIABLE" and "v " model
  // lines, or exit 10/20.
  std::string external_cmd;
};

struct SolveResult {
  SolveStatus status = SolveStatus::kUnknown;
  // 1-indexed by variable; valid (and total) only when status == kSat.
  std::vector<uint8_t> model;

  bool value(Var v) const { return model[v] != 0; }
};

struct SolverStats {
  uint64_t conflicts = 0;
  uint64_t decisions = 0;
  uint64_t propagations = 0;
};

// Incremental CDCL engine: two-watched literals, first-UIP learning, Luby
// restarts, and native parity reasoning (Gaussian elimination over GF(2) at
// solve entry, watched-pair propagation during search). Deterministic for a
// fixed (formula, assumptions, seed).
class Solver {
 public:
  explicit Solver(uint64_t seed = 0);
  ~Solver();
  Solver(const Solver&) = delete;
  Solver& operator=(const Solver&) = delete;

  void load(const CnfFormula& f);  // add_clause/add_xor for every entry
  Var new_var();
  Var num_vars() const;
  void add_clause(const Clause& c);
  void add_xor(const XorClause& x);

  void set_budget(int64_t max_conflicts, double timeout_s);
  SolveStatus solve(const std::vector<Lit>& assumptions = {});

  // Valid after solve() returned kSat, until the next add_/solve call.
  bool model_value(Var v) const;
  std::vector<uint8_t> model() const;  // 1-indexed, like SolveResult

  const SolverStats& stats() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// One-shot solve honoring the backend selection in cfg. Assumptions are
// passed to the builtin engine directly and appended as unit clauses for
// external backends. The returned model is verified against the formula.
SolveResult solve(const CnfFormula& f, const std::vector<Lit>& assumptions,
                  const SolverConfig& cfg);

struct EnumerationResult {
  std::vector<BitVec> models;    // bit i = value of projection[i]
  bool complete = false;         // false when the limit cut off enumeration
  bool budget_exhausted = false; // a solve returned UNKNOWN; models partial
};

// Enumerates assignments over `projection` via blocking clauses, at most
// `limit` of them, in a deterministic order for the builtin backend.
EnumerationResult enumerate_models(const CnfFormula& f,
                                   const std::vector<Var>& projection,
                                   uint64_t limit, const SolverConfig& cfg);

}  // namespace mcfil
