#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mcfil/bitvec.hpp"
#include "mcfil/circuit.hpp"
#include "mcfil/cnf.hpp"
#include "mcfil/counting.hpp"
#include "mcfil/functionality.hpp"
#include "mcfil/maxquery.hpp"
#include "mcfil/outcomes.hpp"

namespace mcfil {

// One query per round against the party holding the hidden target.
// Implementations must be deterministic: identical queries get identical
// results.
class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual BitVec query(const BitVec& chosen) = 0;
  // Out-of-band equality test used by brute-force guessing. nullopt when
  // the oracle has no way to confirm a guess.
  virtual std::optional<bool> check_guess(const BitVec& target) {
    (void)target;
    return std::nullopt;
  }
};

// Evaluates the functionality in-process against a fixed hidden target.
class LocalOracle final : public Oracle {
 public:
  LocalOracle(const Functionality& f, BitVec hidden);
  BitVec query(const BitVec& chosen) override;
  std::optional<bool> check_guess(const BitVec& target) override;
  const BitVec& hidden() const { return hidden_; }
  uint64_t queries() const { return queries_; }

 private:
  Functionality func_;
  BitVec hidden_;
  uint64_t queries_ = 0;
};

// Line protocol against a child process: one lowercase-hex chosen value per
// line on its stdin, one lowercase-hex result per line back on its stdout.
class SubprocessOracle final : public Oracle {
 public:
  SubprocessOracle(const std::string& command, uint32_t chosen_width,
                   uint32_t result_width);
  ~SubprocessOracle() override;
  SubprocessOracle(const SubprocessOracle&) = delete;
  SubprocessOracle& operator=(const SubprocessOracle&) = delete;

  BitVec query(const BitVec& chosen) override;

 private:
  uint32_t chosen_width_;
  uint32_t result_width_;
  int pid_ = -1;
  FILE* to_child_ = nullptr;
  FILE* from_child_ = nullptr;
};

enum class AttackStatus { kRunning, kUnique, kBruteForce, kExhausted, kAborted };

const char* status_name(AttackStatus s);

enum class BruteForcePolicy { kAsk, kContinue, kStop };

struct QueryRecord {
  uint64_t index = 0;  // iteration, 0-based
  BitVec chosen;
  BitVec result;
  uint32_t k_max = 0;
  CountEstimate remaining;  // surviving targets after this query
  std::vector<BitVec> selected_outcomes;
  double elapsed_s = 0.0;
};

struct AttackConfig {
  SolverConfig solver;
  uint64_t seed = 0;
  double epsilon = 0.8;
  double delta = 0.2;
  uint32_t workers = 1;
  uint64_t max_iters = 0;     // 0: 4 * target_width
  uint64_t outcome_cap = 4096;
  BruteForcePolicy on_bruteforce = BruteForcePolicy::kStop;
  // kAsk consults this before guessing; unset behaves like kStop.
  std::function<bool()> ask;
  // Exact remaining-count trace; requires target_width <= 24.
  bool exact_trace = false;
};

struct AttackState {
  std::string func_name;
  uint32_t target_width = 0;
  Circuit circuit;
  CnfFormula formula;  // base compilation + one cone per answered query
  OutcomeSet outcomes;
  std::vector<HistoryEntry> constraints;
  std::vector<QueryRecord> trace;
  std::vector<CnfFormula> instances;  // maximization instance per trace row
  AttackStatus status = AttackStatus::kRunning;
  std::optional<BitVec> witness;  // unique survivor, or confirmed guess
  uint64_t guesses = 0;
  std::string diagnostic;  // ABORTED reason
};

// Cheap two-solve uniqueness test on the current formula: a model, a
// blocking clause, a second solve. Returns the witness when the second
// solve is UNSAT. A first-solve UNSAT means the accumulated history is
// contradictory, which only a miscompiled circuit or a nondeterministic
// oracle can cause, and throws OracleError.
std::optional<BitVec> has_unique_target(const CnfFormula& f,
                                        const SolverConfig& cfg);

// The adaptive loop: derive outcomes once, then per round select outcomes,
// synthesize the query, consult the oracle, and fold F(query, target) =
// result back into the formula. Stops on a unique survivor, the iteration
// budget, or selection degenerating to a single outcome (no query can split
// the survivors; brute-force guessing proceeds per policy). Oracle failures
// and solver timeouts surface as ABORTED with the partial trace kept.
AttackState run_attack(const Functionality& func, Oracle& oracle,
                       const AttackConfig& cfg);

struct LeakageEntry {
  BitVec outcome;
  CountEstimate surviving;    // targets consistent with result = outcome
  long double eliminated = 0.0L;
};

// Single-iteration leakage statistic: for each selected outcome, how many
// candidate targets the synthesized query would eliminate if the oracle
// answered with it.
std::vector<LeakageEntry> estimate_leakage(const CnfFormula& f,
                                           const Circuit& c,
                                           const QuerySynthesis& qs,
                                           const AttackConfig& cfg);

// One extended-DIMACS file per trace row, <func>_<width>_<iter>.cnf,
// capturing the maximization instance at k_max. Returns the paths written.
std::vector<std::string> export_benchmarks(const AttackState& st,
                                           const std::string& directory);

// Trace serialization. CSV header:
//   iter,chosen,result,k_max,remaining,selected,elapsed_ms
// The JSON variant carries the same fields; the plot file is two numeric
// columns (iter, remaining) suitable for gnuplot.
void write_trace_csv(const AttackState& st, std::ostream& out);
void write_trace_json(const AttackState& st, std::ostream& out);
void write_plot_data(const AttackState& st, std::ostream& out);

}  // namespace mcfil
