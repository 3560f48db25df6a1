// mcfil: run adaptive leakage attacks, estimate one-shot leakage, export
// benchmark CNFs. Every flag can also come from an MCFIL_* environment
// variable; an explicit flag wins.
//
// Exit codes: 0 attack reached UNIQUE (or the command succeeded), 2 attack
// stopped at BRUTE_FORCE, 3 iteration budget exhausted, 1 runtime error,
// 64 usage error.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mcfil/attack.hpp"
#include "mcfil/errors.hpp"
#include "mcfil/rng.hpp"
#include "mcfil/solver.hpp"

namespace {

using namespace mcfil;

struct Options {
  std::string func;
  uint64_t width = 0;
  uint64_t bucket = 0;
  std::vector<std::string> params;
  std::string target_hex;
  bool target_random = false;
  std::string oracle_cmd;
  uint64_t seed = 0;
  double epsilon = 0.8;
  double delta = 0.2;
  uint32_t workers = 1;
  std::string backend = "builtin";
  uint64_t max_iters = 0;
  std::string on_bruteforce = "stop";
  std::string trace_path;
  std::string export_dir;
  bool exact_trace = false;
};

void add_func_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--func", o.func, "functionality name")
      ->envname("MCFIL_FUNC")
      ->required();
  cmd->add_option("--width", o.width, "shorthand for --param width=N")
      ->envname("MCFIL_WIDTH");
  cmd->add_option("--bucket", o.bucket, "shorthand for --param bucket=N")
      ->envname("MCFIL_BUCKET");
  cmd->add_option("--param", o.params, "functionality parameter k=v")
      ->envname("MCFIL_PARAM");
}

void add_run_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--seed", o.seed, "master seed")->envname("MCFIL_SEED");
  cmd->add_option("--epsilon", o.epsilon, "counting tolerance")
      ->envname("MCFIL_EPSILON");
  cmd->add_option("--delta", o.delta, "counting error probability")
      ->envname("MCFIL_DELTA");
  cmd->add_option("--workers", o.workers, "parallel solver jobs")
      ->envname("MCFIL_WORKERS");
  cmd->add_option("--backend", o.backend, "builtin | ext:<command>")
      ->envname("MCFIL_BACKEND");
}

void add_attack_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--target", o.target_hex, "hidden target, lowercase hex")
      ->envname("MCFIL_TARGET");
  cmd->add_flag("--target-random", o.target_random,
                "draw the hidden target from the seed")
      ->envname("MCFIL_TARGET_RANDOM");
  cmd->add_option("--oracle-cmd", o.oracle_cmd,
                  "external oracle command (line protocol on stdio)")
      ->envname("MCFIL_ORACLE_CMD");
  cmd->add_option("--max-iters", o.max_iters,
                  "iteration budget (0: 4x target width)")
      ->envname("MCFIL_MAX_ITERS");
  cmd->add_option("--on-bruteforce", o.on_bruteforce, "ask | continue | stop")
      ->envname("MCFIL_ON_BRUTEFORCE")
      ->check(CLI::IsMember({"ask", "continue", "stop"}));
  cmd->add_option("--trace", o.trace_path,
                  "trace stem; writes <stem>.csv/.json/.dat")
      ->envname("MCFIL_TRACE");
  cmd->add_option("--export-cnf", o.export_dir,
                  "directory for per-iteration CNF instances")
      ->envname("MCFIL_EXPORT_CNF");
  cmd->add_flag("--exact-trace", o.exact_trace,
                "exact remaining counts (target width <= 10)")
      ->envname("MCFIL_EXACT_TRACE");
}

Functionality resolve_functionality(const Options& o) {
  std::map<std::string, uint64_t> params;
  for (const std::string& kv : o.params) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("--param expects k=v, got '" + kv + "'");
    }
    params[kv.substr(0, eq)] = std::stoull(kv.substr(eq + 1));
  }
  if (o.width != 0) params["width"] = o.width;
  if (o.bucket != 0) params["bucket"] = o.bucket;
  return make_functionality(o.func, params);
}

SolverConfig resolve_solver(const Options& o) {
  SolverConfig s;
  s.seed = o.seed;
  if (o.backend == "builtin") return s;
  if (o.backend.rfind("ext:", 0) == 0) {
    s.external_cmd = o.backend.substr(4);
    if (s.external_cmd.empty()) throw ConfigError("--backend ext: needs a command");
    return s;
  }
  throw ConfigError("--backend must be builtin or ext:<command>");
}

AttackConfig resolve_attack_config(const Options& o) {
  AttackConfig cfg;
  cfg.solver = resolve_solver(o);
  cfg.seed = o.seed;
  cfg.epsilon = o.epsilon;
  cfg.delta = o.delta;
  cfg.workers = o.workers < 1 ? 1 : o.workers;
  cfg.max_iters = o.max_iters;
  cfg.exact_trace = o.exact_trace;
  if (o.on_bruteforce == "continue") {
    cfg.on_bruteforce = BruteForcePolicy::kContinue;
  } else if (o.on_bruteforce == "ask") {
    cfg.on_bruteforce = BruteForcePolicy::kAsk;
    cfg.ask = [] {
      std::cerr << "selection degenerated; continue with brute-force "
                   "guessing? [y/N] "
                << std::flush;
      std::string line;
      if (!std::getline(std::cin, line)) return false;
      return !line.empty() && (line[0] == 'y' || line[0] == 'Y');
    };
  }
  return cfg;
}

BitVec random_target(uint32_t width, uint64_t seed) {
  RngStream rng(seed, "cli.target", 0);
  BitVec t(width);
  for (uint32_t i = 0; i < width; i++) t.set_bit(i, rng.next_bit());
  return t;
}

std::unique_ptr<Oracle> resolve_oracle(const Functionality& f,
                                       const Options& o) {
  int sources = !o.target_hex.empty() + (o.target_random ? 1 : 0) +
                !o.oracle_cmd.empty();
  if (sources != 1) {
    throw ConfigError(
        "exactly one of --target, --target-random, --oracle-cmd required");
  }
  if (!o.oracle_cmd.empty()) {
    return std::make_unique<SubprocessOracle>(o.oracle_cmd, f.chosen_width,
                                              f.output_width);
  }
  BitVec hidden = o.target_random
                      ? random_target(f.target_width, o.seed)
                      : BitVec::from_hex(f.target_width, o.target_hex);
  return std::make_unique<LocalOracle>(f, hidden);
}

std::string trace_stem(const std::string& path) {
  if (path.size() > 4 && path.compare(path.size() - 4, 4, ".csv") == 0) {
    return path.substr(0, path.size() - 4);
  }
  return path;
}

void write_traces(const AttackState& st, const std::string& stem) {
  std::ofstream csv(stem + ".csv");
  std::ofstream json(stem + ".json");
  std::ofstream dat(stem + ".dat");
  if (!csv || !json || !dat) throw ConfigError("cannot write traces at " + stem);
  write_trace_csv(st, csv);
  write_trace_json(st, json);
  write_plot_data(st, dat);
}

void write_manifest(const AttackState& st, const std::string& dir) {
  nlohmann::ordered_json entries = nlohmann::ordered_json::array();
  for (size_t i = 0; i < st.instances.size(); i++) {
    const CnfFormula& f = st.instances[i];
    entries.push_back({{"name", st.func_name},
                       {"width", st.target_width},
                       {"iter", i},
                       {"vars", f.num_vars},
                       {"clauses", f.clauses.size()},
                       {"xors", f.xors.size()}});
  }
  std::ofstream out(dir + "/manifest.json");
  if (!out) throw ConfigError("cannot write " + dir + "/manifest.json");
  out << entries.dump(2) << "\n";
}

int exit_code(const AttackState& st) {
  switch (st.status) {
    case AttackStatus::kUnique: return 0;
    case AttackStatus::kBruteForce: return 2;
    case AttackStatus::kExhausted: return 3;
    default: return 1;
  }
}

void print_summary(const AttackState& st) {
  std::cout << "status: " << status_name(st.status) << "\n";
  std::cout << "queries: " << st.trace.size() << "\n";
  if (st.guesses > 0) std::cout << "guesses: " << st.guesses << "\n";
  if (st.witness) std::cout << "target: " << st.witness->to_hex() << "\n";
  if (st.status == AttackStatus::kAborted) {
    std::cerr << "error: " << st.diagnostic << "\n";
  }
}

int cmd_attack(const Options& o) {
  Functionality f = resolve_functionality(o);
  AttackConfig cfg = resolve_attack_config(o);
  std::unique_ptr<Oracle> oracle = resolve_oracle(f, o);
  AttackState st = run_attack(f, *oracle, cfg);
  print_summary(st);
  if (!o.trace_path.empty()) write_traces(st, trace_stem(o.trace_path));
  if (!o.export_dir.empty()) {
    export_benchmarks(st, o.export_dir);
    write_manifest(st, o.export_dir);
  }
  return exit_code(st);
}

int cmd_leakage(const Options& o) {
  Functionality f = resolve_functionality(o);
  AttackConfig acfg = resolve_attack_config(o);
  Circuit circuit = f.build();
  CnfFormula base = tseitin_compile(circuit);

  OutcomeConfig ocfg;
  ocfg.solver = acfg.solver;
  ocfg.seed = acfg.seed;
  ocfg.epsilon = acfg.epsilon;
  ocfg.delta = acfg.delta;
  ocfg.workers = acfg.workers;
  OutcomeSet live = derive_outcomes(base, circuit, 4096, ocfg);
  std::cout << "outcomes: " << live.outcomes.size()
            << (live.complete ? "" : " (capped)") << "\n";

  std::vector<Outcome> selected = select_outcomes(base, circuit, {}, live, ocfg);
  for (const Outcome& oc : live.outcomes) {
    bool kept = false;
    for (const Outcome& s : selected) kept = kept || s.value == oc.value;
    if (!kept) std::cout << "dropped: " << oc.value.to_hex() << "\n";
  }
  if (selected.size() <= 1) {
    std::cout << "no leakage: single outcome\n";
    return 0;
  }
  for (const Outcome& s : selected) {
    std::cout << "selected: " << s.value.to_hex() << " count ~2^"
              << std::log2(1.0 + (double)s.approx_count.count) << "\n";
  }

  MaxQueryConfig mcfg;
  mcfg.solver = acfg.solver;
  mcfg.seed = acfg.seed;
  mcfg.workers = acfg.workers;
  std::vector<BitVec> values;
  for (const Outcome& s : selected) values.push_back(s.value);
  auto qs = maximize_query(base, circuit, {}, values, mcfg);
  if (!qs) {
    std::cout << "no leakage: selection not co-satisfiable\n";
    return 0;
  }
  std::cout << "query: " << qs->chosen_value.to_hex() << " (k_max "
            << qs->k_max << ")\n";

  for (const LeakageEntry& e : estimate_leakage(base, circuit, *qs, acfg)) {
    std::cout << "outcome " << e.outcome.to_hex() << ": surviving "
              << e.surviving.str() << ", eliminated ~2^"
              << std::log2(1.0L + e.eliminated) << "\n";
  }
  return 0;
}

int cmd_export(const Options& o) {
  if (o.export_dir.empty()) throw ConfigError("export requires --export-cnf");
  Functionality f = resolve_functionality(o);
  AttackConfig cfg = resolve_attack_config(o);
  std::unique_ptr<Oracle> oracle = resolve_oracle(f, o);
  AttackState st = run_attack(f, *oracle, cfg);
  std::vector<std::string> paths = export_benchmarks(st, o.export_dir);
  write_manifest(st, o.export_dir);
  for (const std::string& p : paths) std::cout << p << "\n";
  return st.status == AttackStatus::kAborted ? 1 : 0;
}

// Solves one extended-DIMACS file with the builtin engine and reports in
// the conventions resolve_solver's ext: backend expects, so the binary can
// serve as its own external solver.
int cmd_solve(const std::string& path, uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  CnfFormula f = read_dimacs(in);
  SolverConfig cfg;
  cfg.seed = seed;
  SolveResult r = solve(f, {}, cfg);
  if (r.status == SolveStatus::kUnsat) {
    std::cout << "s UNSATISFIABLE\n";
    return 20;
  }
  if (r.status != SolveStatus::kSat) {
    std::cout << "s UNKNOWN\n";
    return 1;
  }
  std::cout << "s SATISFIABLE\n";
  std::cout << "v";
  for (Var v = 1; v <= f.num_vars; v++) {
    std::cout << " " << (r.value(v) ? (int64_t)v : -(int64_t)v);
  }
  std::cout << " 0\n";
  return 10;
}

// The subprocess-oracle shim: evaluates the functionality against a fixed
// target, one hex chosen value per stdin line, one hex result per stdout
// line. Lets any attack run against this same binary as a separate process.
int cmd_oracle(const Options& o) {
  Functionality f = resolve_functionality(o);
  if (o.target_hex.empty() && !o.target_random) {
    throw ConfigError("oracle requires --target or --target-random");
  }
  BitVec hidden = o.target_random
                      ? random_target(f.target_width, o.seed)
                      : BitVec::from_hex(f.target_width, o.target_hex);
  LocalOracle oracle(f, hidden);
  std::string line;
  while (std::getline(std::cin, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
      line.pop_back();
    }
    if (line.empty()) continue;
    BitVec chosen = BitVec::from_hex(f.chosen_width, line);
    std::cout << oracle.query(chosen).to_hex() << "\n" << std::flush;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"functionality-inherent leakage analyzer"};
  app.require_subcommand(1);

  Options o;
  std::string solve_path;

  CLI::App* attack = app.add_subcommand("attack", "run an adaptive attack");
  add_func_flags(attack, o);
  add_run_flags(attack, o);
  add_attack_flags(attack, o);

  CLI::App* leakage =
      app.add_subcommand("leakage", "one-shot leakage estimate, no oracle");
  add_func_flags(leakage, o);
  add_run_flags(leakage, o);

  CLI::App* exp =
      app.add_subcommand("export", "run an attack and export benchmark CNFs");
  add_func_flags(exp, o);
  add_run_flags(exp, o);
  add_attack_flags(exp, o);

  CLI::App* solve_cmd =
      app.add_subcommand("solve", "solve one extended-DIMACS file");
  solve_cmd->add_option("file", solve_path, "CNF path")->required();
  solve_cmd->add_option("--seed", o.seed, "decision seed")
      ->envname("MCFIL_SEED");

  CLI::App* oracle_cmd =
      app.add_subcommand("oracle", "serve the stdio oracle protocol");
  add_func_flags(oracle_cmd, o);
  oracle_cmd->add_option("--target", o.target_hex, "hidden target, hex");
  oracle_cmd->add_flag("--target-random", o.target_random,
                       "draw the hidden target from the seed");
  oracle_cmd->add_option("--seed", o.seed, "master seed")
      ->envname("MCFIL_SEED");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 64;
  }

  try {
    if (*attack) return cmd_attack(o);
    if (*leakage) return cmd_leakage(o);
    if (*exp) return cmd_export(o);
    if (*solve_cmd) return cmd_solve(solve_path, o.seed);
    if (*oracle_cmd) return cmd_oracle(o);
  } catch (const mcfil::ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 64;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 64;
}
