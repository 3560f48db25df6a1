#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mcfil/bitvec.hpp"
#include "mcfil/circuit.hpp"
#include "mcfil/cnf.hpp"
#include "mcfil/counting.hpp"

namespace mcfil {

// One answered oracle query; the constraint F(query, target) = result.
struct HistoryEntry {
  BitVec query;
  BitVec result;
};

// One outcome class in a maximization instance: a fresh target block whose
// cone is forced to this outcome, sharing the chosen variables with every
// other copy. hashes holds the parity constraints applied to the block.
struct OutcomeCopy {
  BitVec outcome;
  std::vector<Var> target_copy;
  std::vector<HashConstraint> hashes;
};

struct CopyInstance {
  CnfFormula formula;
  std::vector<OutcomeCopy> copies;
};

// Appends, for every outcome, a fresh target block with its forced output
// cone plus a replica of every history constraint, all sharing the base
// formula's chosen variables. The base must carry a bitmap (come from
// tseitin_compile).
CopyInstance instantiate_copies(const CnfFormula& base, const Circuit& circuit,
                                const std::vector<HistoryEntry>& history,
                                const std::vector<BitVec>& outcomes);

struct MaxQueryConfig {
  SolverConfig solver;
  uint64_t seed = 0;
  uint64_t call_index = 0;  // attack iteration; keys the hash streams
  uint32_t workers = 1;
};

struct QuerySynthesis {
  BitVec chosen_value;
  uint32_t k_max = 0;
  std::vector<OutcomeCopy> copies;  // hashes trimmed to the k_max prefix
  CnfFormula instance;              // the satisfiable instance at k_max
};

// The Max#SAT step: finds the largest k such that the copy conjunction stays
// satisfiable with k sampled hashes per copy (one shared k, prefix draws
// reused across levels within this call), and returns the chosen assignment
// from a model at that k. Each selected class then holds about 2^k_max
// candidate targets. Returns nullopt when the conjunction is already UNSAT
// at k = 0, which tells the caller to reselect outcomes.
std::optional<QuerySynthesis> maximize_query(
    const CnfFormula& base, const Circuit& circuit,
    const std::vector<HistoryEntry>& history,
    const std::vector<BitVec>& selected, const MaxQueryConfig& cfg);

}  // namespace mcfil
