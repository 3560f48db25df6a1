#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "mcfil/cnf.hpp"
#include "mcfil/rng.hpp"
#include "mcfil/solver.hpp"

using namespace mcfil;

namespace {

std::string cli() {
  const char* p = std::getenv("MCFIL_CLI_PATH");
  REQUIRE_MESSAGE(p != nullptr, "MCFIL_CLI_PATH must point at the binary");
  return p;
}

struct RunResult {
  int exit_code = -1;
  std::string output;
};

// Runs through /bin/sh with stderr folded into stdout.
RunResult run(const std::string& command) {
  RunResult r;
  FILE* p = popen((command + " 2>&1").c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.output.append(buf, n);
  int status = pclose(p);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -WTERMSIG(status);
  return r;
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name)
      : path(std::filesystem::temp_directory_path() /
             (name + "." + std::to_string(getpid()))) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& leaf) const {
    return (path / leaf).string();
  }
};

CnfFormula random_formula(RngStream& rng) {
  CnfFormula f;
  uint32_t vars = 6 + rng.next_u64() % 6;
  f.num_vars = vars;
  uint32_t clauses = 2 + rng.next_u64() % (3 * vars);
  for (uint32_t i = 0; i < clauses; i++) {
    Clause cl;
    uint32_t len = 1 + rng.next_u64() % 3;
    for (uint32_t j = 0; j < len; j++) {
      Var v = 1 + rng.next_u64() % vars;
      cl.push_back(rng.next_bit() ? static_cast<Lit>(v)
                                  : -static_cast<Lit>(v));
    }
    f.add_clause(cl);
  }
  if (rng.next_u64() % 3 == 0) {
    std::vector<Lit> xs;
    uint32_t len = 2 + rng.next_u64() % 3;
    for (uint32_t j = 0; j < len; j++) {
      xs.push_back(static_cast<Lit>(1 + rng.next_u64() % vars));
    }
    f.add_xor(xs, rng.next_bit());
  }
  return f;
}

}  // namespace

TEST_CASE("attack recovers a fixed target and exits clean") {
  RunResult r = run(cli() +
                    " attack --func millionaires --width 8 --target 2a --seed 3");
  CHECK(r.exit_code == 0);
  CHECK(contains(r.output, "status: UNIQUE"));
  CHECK(contains(r.output, "target: 2a"));
}

TEST_CASE("indistinguishable buckets map to the brute-force exit code") {
  std::string base =
      cli() + " attack --func bucketed_mean --width 8 --bucket 16 --target 64";
  RunResult stop = run(base);
  CHECK(stop.exit_code == 2);
  CHECK(contains(stop.output, "status: BRUTE_FORCE"));
  CHECK_FALSE(contains(stop.output, "target: 64"));

  RunResult go = run(base + " --on-bruteforce continue");
  CHECK(go.exit_code == 2);
  CHECK(contains(go.output, "target: 64"));
  CHECK(contains(go.output, "guesses:"));
}

TEST_CASE("iteration budget maps to the exhausted exit code") {
  RunResult r = run(
      cli() + " attack --func millionaires --width 8 --target 2a --max-iters 1");
  CHECK(r.exit_code == 3);
  CHECK(contains(r.output, "status: EXHAUSTED"));
}

TEST_CASE("usage problems exit 64") {
  CHECK(run(cli()).exit_code == 64);                       // no subcommand
  CHECK(run(cli() + " attack").exit_code == 64);           // missing --func
  CHECK(run(cli() + " attack --func millionaires --width 8 --target 2a "
                    "--on-bruteforce sometimes")
            .exit_code == 64);
  CHECK(run(cli() + " attack --func no_such_thing --target 0").exit_code == 64);
  CHECK(run(cli() + " attack --func millionaires --width 8").exit_code == 64);
  RunResult helped = run(cli() + " --help");
  CHECK(helped.exit_code == 0);
  CHECK(contains(helped.output, "attack"));
}

TEST_CASE("a dying oracle aborts with exit 1") {
  RunResult r = run(cli() +
                    " attack --func millionaires --width 8 --oracle-cmd false");
  CHECK(r.exit_code == 1);
  CHECK(contains(r.output, "status: ABORTED"));
  CHECK(contains(r.output, "error:"));
}

TEST_CASE("solve speaks the external solver conventions") {
  TempDir dir("mcfil_cli_solve");
  {
    std::ofstream out(dir.file("sat.cnf"));
    out << "p cnf 3 3\n1 -2 0\n2 3 0\nx1 3 0\n";
  }
  RunResult sat = run(cli() + " solve " + dir.file("sat.cnf"));
  CHECK(sat.exit_code == 10);
  CHECK(contains(sat.output, "s SATISFIABLE"));
  REQUIRE(contains(sat.output, "\nv "));
  // the printed model must satisfy the formula it came from
  std::istringstream ls(sat.output);
  std::string line;
  std::vector<bool> assign(4, false);
  while (std::getline(ls, line)) {
    if (line.rfind("v ", 0) != 0) continue;
    std::istringstream ws(line.substr(2));
    int64_t lit;
    while (ws >> lit && lit != 0) assign[std::abs(lit)] = lit > 0;
  }
  CHECK((assign[1] || !assign[2]));
  CHECK((assign[2] || assign[3]));
  CHECK((assign[1] ^ assign[3]) == true);

  {
    std::ofstream out(dir.file("unsat.cnf"));
    out << "p cnf 1 2\n1 0\n-1 0\n";
  }
  CHECK(run(cli() + " solve " + dir.file("unsat.cnf")).exit_code == 20);
  CHECK(run(cli() + " solve " + dir.file("missing.cnf")).exit_code == 64);
}

TEST_CASE("the binary serves as its own external backend") {
  std::string quoted = "\"ext:" + cli() + " solve {cnf_path}\"";
  RunResult r = run(cli() +
                    " attack --func mean_average --width 8 --target 55 "
                    "--backend " +
                    quoted);
  CHECK(r.exit_code == 0);
  CHECK(contains(r.output, "target: 55"));

  // without the placeholder the path is appended as the last argument
  RunResult appended = run(cli() +
                           " attack --func and_gate --target 1 --backend "
                           "\"ext:" +
                           cli() + " solve\"");
  CHECK(appended.exit_code == 0);
  CHECK(contains(appended.output, "target: 1"));
}

TEST_CASE("builtin and external verdicts agree on random formulas") {
  TempDir dir("mcfil_cli_agree");
  RngStream rng(2024, "test.cli.formulas", 0);
  SolverConfig scfg;
  int sat_seen = 0, unsat_seen = 0;
  for (int i = 0; i < 150; i++) {
    CnfFormula f = random_formula(rng);
    SolveResult builtin = solve(f, {}, scfg);
    REQUIRE(builtin.status != SolveStatus::kUnknown);
    std::string path = dir.file("f" + std::to_string(i) + ".cnf");
    {
      std::ofstream out(path);
      write_dimacs(f, out);
    }
    int code = run(cli() + " solve " + path).exit_code;
    if (builtin.status == SolveStatus::kSat) {
      CHECK(code == 10);
      sat_seen++;
    } else {
      CHECK(code == 20);
      unsat_seen++;
    }
  }
  CHECK(sat_seen >= 30);
  CHECK(unsat_seen >= 30);
}

TEST_CASE("oracle shim answers over stdio end to end") {
  std::string shim = "\"" + cli() +
                     " oracle --func millionaires --width 8 --target 5c\"";
  RunResult r = run(cli() +
                    " attack --func millionaires --width 8 --oracle-cmd " +
                    shim);
  CHECK(r.exit_code == 0);
  CHECK(contains(r.output, "status: UNIQUE"));
  CHECK(contains(r.output, "target: 5c"));

  // the shim itself: one hex query per line, one hex result per line
  RunResult direct = run("printf '60\\nff\\n10\\n' | " + cli() +
                         " oracle --func millionaires --width 8 --target 5c");
  CHECK(direct.exit_code == 0);
  CHECK(direct.output == "1\n1\n0\n");
}

TEST_CASE("environment variables configure and flags win") {
  std::string env = "MCFIL_FUNC=millionaires MCFIL_WIDTH=8 MCFIL_TARGET=2a ";
  RunResult r = run(env + cli() + " attack");
  CHECK(r.exit_code == 0);
  CHECK(contains(r.output, "target: 2a"));

  RunResult flag = run(env + cli() + " attack --target 1f");
  CHECK(flag.exit_code == 0);
  CHECK(contains(flag.output, "target: 1f"));

  RunResult iters = run(env + "MCFIL_MAX_ITERS=1 " + cli() + " attack");
  CHECK(iters.exit_code == 3);
}

TEST_CASE("trace and export artifacts land where asked") {
  TempDir dir("mcfil_cli_artifacts");
  std::string stem = dir.file("run");
  RunResult r = run(cli() +
                    " attack --func millionaires --width 8 --target 2a "
                    "--trace " +
                    stem + " --export-cnf " + dir.file("cnf"));
  CHECK(r.exit_code == 0);
  for (const char* ext : {".csv", ".json", ".dat"}) {
    CAPTURE(ext);
    CHECK(std::filesystem::exists(stem + ext));
  }
  {
    std::ifstream csv(stem + ".csv");
    std::string header;
    REQUIRE(std::getline(csv, header));
    CHECK(header == "iter,chosen,result,k_max,remaining,selected,elapsed_ms");
  }
  {
    std::ifstream js(stem + ".json");
    nlohmann::json doc = nlohmann::json::parse(js);
    CHECK(doc.at("status") == "UNIQUE");
    CHECK(doc.at("witness") == "2a");
  }
  std::ifstream mf(dir.file("cnf") + "/manifest.json");
  REQUIRE(mf.good());
  nlohmann::json manifest = nlohmann::json::parse(mf);
  REQUIRE(manifest.is_array());
  REQUIRE_FALSE(manifest.empty());
  size_t cnfs = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir.file("cnf"))) {
    if (entry.path().extension() == ".cnf") cnfs++;
  }
  CHECK(cnfs == manifest.size());
  for (const auto& e : manifest) {
    CHECK(e.at("name") == "millionaires");
    CHECK(e.at("width") == 8);
    CHECK(e.at("vars").get<uint64_t>() > 0);
    CHECK(e.at("clauses").get<uint64_t>() > 0);
  }
}

TEST_CASE("leakage subcommand reports the one-shot estimate") {
  RunResult r = run(cli() + " leakage --func mean_average --width 2");
  CHECK(r.exit_code == 0);
  CHECK(contains(r.output, "outcomes: 4"));
  CHECK(contains(r.output, "dropped: 0"));
  CHECK(contains(r.output, "dropped: 3"));
  CHECK(contains(r.output, "selected: 1"));
  CHECK(contains(r.output, "selected: 2"));
  CHECK(contains(r.output, "query: "));
  CHECK(contains(r.output, "outcome 1: surviving"));
  CHECK(contains(r.output, "outcome 2: surviving"));
}
