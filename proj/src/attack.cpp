#include "mcfil/attack.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <utility>

#include "json.hpp"
#include "mcfil/errors.hpp"

namespace mcfil {

namespace {

BitVec target_of(const CnfFormula& f, const SolveResult& r) {
  BitVec m(static_cast<uint32_t>(f.bitmap.target.size()));
  for (uint32_t i = 0; i < m.width(); i++) {
    m.set_bit(i, r.value(f.bitmap.target[i]));
  }
  return m;
}

Clause block_target(const CnfFormula& f, const BitVec& m) {
  Clause block;
  block.reserve(m.width());
  for (uint32_t i = 0; i < m.width(); i++) {
    Var v = f.bitmap.target[i];
    block.push_back(m.bit(i) ? -static_cast<Lit>(v) : static_cast<Lit>(v));
  }
  return block;
}

CountEstimate remaining_count(const CnfFormula& f, const AttackConfig& cfg,
                              uint64_t iter) {
  CountConfig cc;
  cc.solver = cfg.solver;
  cc.seed = cfg.seed;
  cc.purpose = "attack.remaining";
  cc.call_index = iter;
  if (cfg.exact_trace) {
    if (f.bitmap.target.size() > 24) {
      throw ConfigError("exact trace requires target width <= 24");
    }
    return count_exact(f, f.bitmap.target, cc);
  }
  return count_approx(f, f.bitmap.target, cfg.epsilon, cfg.delta, cc);
}

std::string millis(double seconds) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", seconds * 1e3);
  return buf;
}

}  // namespace

const char* status_name(AttackStatus s) {
  switch (s) {
    case AttackStatus::kRunning: return "RUNNING";
    case AttackStatus::kUnique: return "UNIQUE";
    case AttackStatus::kBruteForce: return "BRUTE_FORCE";
    case AttackStatus::kExhausted: return "EXHAUSTED";
    case AttackStatus::kAborted: return "ABORTED";
  }
  return "?";
}

LocalOracle::LocalOracle(const Functionality& f, BitVec hidden)
    : func_(f), hidden_(std::move(hidden)) {
  if (hidden_.width() != func_.target_width) {
    throw ConfigError("hidden target width " + std::to_string(hidden_.width()) +
                      " != functionality target width " +
                      std::to_string(func_.target_width));
  }
}

BitVec LocalOracle::query(const BitVec& chosen) {
  queries_++;
  return func_.eval(chosen, hidden_);
}

std::optional<bool> LocalOracle::check_guess(const BitVec& target) {
  return target == hidden_;
}

SubprocessOracle::SubprocessOracle(const std::string& command,
                                   uint32_t chosen_width, uint32_t result_width)
    : chosen_width_(chosen_width), result_width_(result_width) {
  // A dead child must surface as OracleError from the write, not SIGPIPE.
  signal(SIGPIPE, SIG_IGN);
  int to_pipe[2];
  int from_pipe[2];
  if (pipe(to_pipe) != 0) throw OracleError("oracle pipe failed");
  if (pipe(from_pipe) != 0) {
    close(to_pipe[0]);
    close(to_pipe[1]);
    throw OracleError("oracle pipe failed");
  }
  pid_ = fork();
  if (pid_ < 0) throw OracleError("oracle fork failed");
  if (pid_ == 0) {
    dup2(to_pipe[0], 0);
    dup2(from_pipe[1], 1);
    close(to_pipe[0]);
    close(to_pipe[1]);
    close(from_pipe[0]);
    close(from_pipe[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(to_pipe[0]);
  close(from_pipe[1]);
  to_child_ = fdopen(to_pipe[1], "w");
  from_child_ = fdopen(from_pipe[0], "r");
  if (!to_child_ || !from_child_) throw OracleError("oracle fdopen failed");
}

SubprocessOracle::~SubprocessOracle() {
  if (to_child_) fclose(to_child_);
  if (from_child_) fclose(from_child_);
  if (pid_ > 0) {
    int status = 0;
    waitpid(pid_, &status, 0);
  }
}

BitVec SubprocessOracle::query(const BitVec& chosen) {
  if (chosen.width() != chosen_width_) {
    throw OracleError("oracle query width mismatch");
  }
  if (std::fprintf(to_child_, "%s\n", chosen.to_hex().c_str()) < 0 ||
      std::fflush(to_child_) != 0) {
    throw OracleError("oracle write failed");
  }
  char* line = nullptr;
  size_t cap = 0;
  ssize_t n = getline(&line, &cap, from_child_);
  std::string reply = n > 0 ? std::string(line, static_cast<size_t>(n)) : "";
  free(line);
  if (n <= 0) throw OracleError("oracle closed the stream");
  while (!reply.empty() && (reply.back() == '\n' || reply.back() == '\r' ||
                            reply.back() == ' ')) {
    reply.pop_back();
  }
  try {
    return BitVec::from_hex(result_width_, reply);
  } catch (const Error&) {
    throw OracleError("unparsable oracle reply: \"" + reply + "\"");
  }
}

std::optional<BitVec> has_unique_target(const CnfFormula& f,
                                        const SolverConfig& cfg) {
  if (f.bitmap.target.empty()) {
    throw CnfError("has_unique_target: formula has no target bitmap");
  }
  SolveResult first = solve(f, {}, cfg);
  if (first.status == SolveStatus::kUnknown) {
    throw SolverError("has_unique_target: solve budget exhausted");
  }
  if (first.status == SolveStatus::kUnsat) {
    throw OracleError(
        "query history is contradictory: oracle inconsistent with circuit");
  }
  BitVec m = target_of(f, first);
  CnfFormula g = f;
  g.add_clause(block_target(f, m));
  SolveResult second = solve(g, {}, cfg);
  if (second.status == SolveStatus::kUnknown) {
    throw SolverError("has_unique_target: solve budget exhausted");
  }
  if (second.status == SolveStatus::kUnsat) return m;
  return std::nullopt;
}

AttackState run_attack(const Functionality& func, Oracle& oracle,
                       const AttackConfig& cfg) {
  AttackState st;
  st.func_name = func.name;
  st.target_width = func.target_width;
  st.circuit = func.build();
  st.formula = tseitin_compile(st.circuit);
  uint64_t budget = cfg.max_iters ? cfg.max_iters : 4ull * func.target_width;

  OutcomeConfig ocfg;
  ocfg.solver = cfg.solver;
  ocfg.seed = cfg.seed;
  ocfg.epsilon = cfg.epsilon;
  ocfg.delta = cfg.delta;
  ocfg.workers = cfg.workers;

  try {
    st.outcomes = derive_outcomes(st.formula, st.circuit, cfg.outcome_cap, ocfg);

    for (uint64_t iter = 0;; iter++) {
      if (auto w = has_unique_target(st.formula, cfg.solver)) {
        st.status = AttackStatus::kUnique;
        st.witness = std::move(w);
        break;
      }
      if (iter >= budget) {
        st.status = AttackStatus::kExhausted;
        break;
      }
      auto t0 = std::chrono::steady_clock::now();

      OutcomeConfig oc = ocfg;
      oc.call_index = iter;
      std::vector<Outcome> selected =
          select_outcomes(st.formula, st.circuit, st.constraints, st.outcomes,
                          oc);
      if (selected.size() <= 1) {
        // No query splits the survivors; they are oracle-indistinguishable.
        st.status = AttackStatus::kBruteForce;
        bool go = cfg.on_bruteforce == BruteForcePolicy::kContinue ||
                  (cfg.on_bruteforce == BruteForcePolicy::kAsk && cfg.ask &&
                   cfg.ask());
        if (go) {
          constexpr uint64_t kGuessCap = 1u << 20;
          while (st.guesses < kGuessCap) {
            SolveResult r = solve(st.formula, {}, cfg.solver);
            if (r.status == SolveStatus::kUnknown) {
              throw SolverError("guessing: solve budget exhausted");
            }
            if (r.status == SolveStatus::kUnsat) {
              throw OracleError(
                  "every candidate rejected while guessing: oracle "
                  "inconsistent with circuit");
            }
            BitVec guess = target_of(st.formula, r);
            st.guesses++;
            std::optional<bool> hit = oracle.check_guess(guess);
            if (!hit) break;  // oracle cannot confirm guesses
            if (*hit) {
              st.witness = std::move(guess);
              break;
            }
            st.formula.add_clause(block_target(st.formula, guess));
          }
        }
        break;
      }

      std::vector<BitVec> values;
      values.reserve(selected.size());
      for (const Outcome& o : selected) values.push_back(o.value);

      MaxQueryConfig mqc;
      mqc.solver = cfg.solver;
      mqc.seed = cfg.seed;
      mqc.call_index = iter;
      mqc.workers = cfg.workers;
      std::optional<QuerySynthesis> qs =
          maximize_query(st.formula, st.circuit, st.constraints, values, mqc);
      if (!qs) {
        throw SolverError(
            "maximize_query found no model for a co-satisfiable selection");
      }

      BitVec result = oracle.query(qs->chosen_value);
      if (result.width() != func.output_width) {
        throw OracleError("oracle result width " +
                          std::to_string(result.width()) + " != output width " +
                          std::to_string(func.output_width));
      }
      append_cone(st.formula, st.circuit, InputBits::constant(qs->chosen_value),
                  InputBits::vars(st.formula.bitmap.target), result);
      st.constraints.push_back(HistoryEntry{qs->chosen_value, result});

      QueryRecord rec;
      rec.index = iter;
      rec.chosen = qs->chosen_value;
      rec.result = result;
      rec.k_max = qs->k_max;
      rec.selected_outcomes = std::move(values);
      rec.remaining = remaining_count(st.formula, cfg, iter);
      rec.elapsed_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();
      st.trace.push_back(std::move(rec));
      st.instances.push_back(std::move(qs->instance));
    }
  } catch (const std::exception& e) {
    st.status = AttackStatus::kAborted;
    st.diagnostic = e.what();
  }
  return st;
}

std::vector<LeakageEntry> estimate_leakage(const CnfFormula& f,
                                           const Circuit& c,
                                           const QuerySynthesis& qs,
                                           const AttackConfig& cfg) {
  CountConfig cc;
  cc.solver = cfg.solver;
  cc.seed = cfg.seed;
  cc.purpose = "leakage";
  cc.call_index = 0;
  bool exact = f.bitmap.target.size() <= 24;
  CountEstimate total =
      exact ? count_exact(f, f.bitmap.target, cc)
            : count_approx(f, f.bitmap.target, cfg.epsilon, cfg.delta, cc);

  std::vector<LeakageEntry> report;
  report.reserve(qs.copies.size());
  for (size_t i = 0; i < qs.copies.size(); i++) {
    CnfFormula fo = f;
    append_cone(fo, c, InputBits::constant(qs.chosen_value),
                InputBits::vars(fo.bitmap.target), qs.copies[i].outcome);
    CountConfig ci = cc;
    ci.call_index = i + 1;
    LeakageEntry e;
    e.outcome = qs.copies[i].outcome;
    e.surviving = exact
                      ? count_exact(fo, fo.bitmap.target, ci)
                      : count_approx(fo, fo.bitmap.target, cfg.epsilon,
                                     cfg.delta, ci);
    e.eliminated = total.count - e.surviving.count;
    if (e.eliminated < 0.0L) e.eliminated = 0.0L;
    report.push_back(std::move(e));
  }
  return report;
}

std::vector<std::string> export_benchmarks(const AttackState& st,
                                           const std::string& directory) {
  std::filesystem::create_directories(directory);
  std::vector<std::string> paths;
  paths.reserve(st.instances.size());
  for (size_t i = 0; i < st.instances.size(); i++) {
    std::string path = directory + "/" + st.func_name + "_" +
                       std::to_string(st.target_width) + "_" +
                       std::to_string(i) + ".cnf";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path);
    write_dimacs(st.instances[i], out);
    if (!out) throw Error("write failed: " + path);
    paths.push_back(std::move(path));
  }
  return paths;
}

void write_trace_csv(const AttackState& st, std::ostream& out) {
  out << "iter,chosen,result,k_max,remaining,selected,elapsed_ms\n";
  for (const QueryRecord& r : st.trace) {
    out << r.index << ',' << r.chosen.to_hex() << ',' << r.result.to_hex()
        << ',' << r.k_max << ',' << r.remaining.str() << ',';
    for (size_t i = 0; i < r.selected_outcomes.size(); i++) {
      if (i) out << ';';
      out << r.selected_outcomes[i].to_hex();
    }
    out << ',' << millis(r.elapsed_s) << '\n';
  }
}

void write_trace_json(const AttackState& st, std::ostream& out) {
  nlohmann::ordered_json doc;
  doc["functionality"] = st.func_name;
  doc["target_width"] = st.target_width;
  doc["status"] = status_name(st.status);
  if (st.witness) doc["witness"] = st.witness->to_hex();
  if (st.guesses) doc["guesses"] = st.guesses;
  if (!st.diagnostic.empty()) doc["diagnostic"] = st.diagnostic;
  auto rows = nlohmann::ordered_json::array();
  for (const QueryRecord& r : st.trace) {
    nlohmann::ordered_json row;
    row["iter"] = r.index;
    row["chosen"] = r.chosen.to_hex();
    row["result"] = r.result.to_hex();
    row["k_max"] = r.k_max;
    row["remaining"] = r.remaining.str();
    auto sel = nlohmann::ordered_json::array();
    for (const BitVec& v : r.selected_outcomes) sel.push_back(v.to_hex());
    row["selected"] = std::move(sel);
    row["elapsed_ms"] = millis(r.elapsed_s);
    rows.push_back(std::move(row));
  }
  doc["trace"] = std::move(rows);
  out << doc.dump(2) << '\n';
}

void write_plot_data(const AttackState& st, std::ostream& out) {
  out << "# iter remaining\n";
  for (const QueryRecord& r : st.trace) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%llu %.6Lg\n",
                  static_cast<unsigned long long>(r.index), r.remaining.count);
    out << buf;
  }
}

}  // namespace mcfil
