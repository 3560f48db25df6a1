#pragma once

#include <cstdint>
#include <vector>

#include "mcfil/bitvec.hpp"
#include "mcfil/circuit.hpp"
#include "mcfil/cnf.hpp"
#include "mcfil/counting.hpp"
#include "mcfil/maxquery.hpp"

namespace mcfil {

struct Outcome {
  BitVec value;
  CountEstimate approx_count;  // candidate targets inducing it, current state
  bool alive = true;           // still consistent with history
};

struct OutcomeSet {
  std::vector<Outcome> outcomes;  // values pairwise distinct
  bool complete = false;          // enumeration exhausted vs capped
};

struct OutcomeConfig {
  SolverConfig solver;
  uint64_t seed = 0;
  double epsilon = 0.8;
  double delta = 0.2;
  uint32_t workers = 1;
  uint64_t call_index = 0;  // attack iteration; keys the count streams
};

// Reachable-output enumeration by blocking clauses over the output bits.
// Runs once per attack, on the history-free formula. cap >= 2.
OutcomeSet derive_outcomes(const CnfFormula& f, const Circuit& c, uint64_t cap,
                           const OutcomeConfig& cfg);

// The selection heuristic. Counts each live outcome's candidate targets
// under the current formula (projection on the target bits, chosen free),
// marks zero-count outcomes dead, sorts the rest by ascending count, and
// drops the smallest while the set is not simultaneously satisfiable at
// k = 0. A final refinement keeps dropping, down to at most two outcomes,
// until every class holds two distinct candidates under one common chosen
// input, which keeps the synthesized query informative. Survivors come back
// in ascending count order; a result of size <= 1 is the caller's
// brute-force signal.
std::vector<Outcome> select_outcomes(const CnfFormula& f, const Circuit& c,
                                     const std::vector<HistoryEntry>& history,
                                     OutcomeSet& live,
                                     const OutcomeConfig& cfg);

}  // namespace mcfil
