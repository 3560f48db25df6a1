#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "mcfil/errors.hpp"
#include "mcfil/rng.hpp"
#include "mcfil/solver.hpp"

namespace mcfil {

namespace {

struct TempFile {
  std::filesystem::path path;
  explicit TempFile(const std::string& stem) {
    static uint64_t counter = 0;
    std::ostringstream name;
    name << stem << "-" << ::getpid() << "-" << counter++ << ".cnf";
    path = std::filesystem::temp_directory_path() / name.str();
  }
  ~TempFile() {
    std::error_code ec;
    std::filesystem::remove(path, ec);
  }
};

std::string run_command(const std::string& cmd, int& exit_code) {
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) throw SolverError("failed to launch external solver: " + cmd);
  std::string out;
  char buf[4096];
  size_t n;
  while ((n = ::fread(buf, 1, sizeof(buf), pipe)) > 0) out.append(buf, n);
  int status = ::pclose(pipe);
  exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return out;
}

void verify_against(const CnfFormula& f, const std::vector<Lit>& assumptions,
                    const std::vector<uint8_t>& model) {
  auto lit_true = [&](Lit l) {
    Var v = static_cast<Var>(l < 0 ? -l : l);
    bool val = model[v] != 0;
    return l < 0 ? !val : val;
  };
  for (const Clause& c : f.clauses) {
    bool sat = false;
    for (Lit l : c) {
      if (lit_true(l)) {
        sat = true;
        break;
      }
    }
    if (!sat) throw SolverError("external model violates a clause");
  }
  for (const XorClause& x : f.xors) {
    bool p = false;
    for (Var v : x.vars) p ^= model[v] != 0;
    if (p != x.rhs) throw SolverError("external model violates an xor");
  }
  for (Lit a : assumptions) {
    if (!lit_true(a)) throw SolverError("external model violates an assumption");
  }
}

SolveResult solve_external(const CnfFormula& f,
                           const std::vector<Lit>& assumptions,
                           const SolverConfig& cfg) {
  CnfFormula inst = f;
  for (Lit a : assumptions) inst.add_clause({a});
  if (!cfg.xor_native) blast_xors(inst);

  TempFile tmp("mcfil");
  {
    std::ofstream out(tmp.path);
    if (!out) throw SolverError("cannot write " + tmp.path.string());
    write_dimacs(inst, out);
  }
  std::string cmd = cfg.external_cmd;
  const std::string placeholder = "{cnf_path}";
  size_t at = cmd.find(placeholder);
  if (at != std::string::npos) {
    cmd.replace(at, placeholder.size(), tmp.path.string());
  } else {
    cmd += " " + tmp.path.string();
  }

  int exit_code = 0;
  std::string out = run_command(cmd, exit_code);

  SolveResult res;
  bool sat_line = out.find("s SATISFIABLE") != std::string::npos;
  bool unsat_line = out.find("s UNSATISFIABLE") != std::string::npos;
  if (exit_code == 10 || sat_line) {
    res.status = SolveStatus::kSat;
  } else if (exit_code == 20 || unsat_line) {
    res.status = SolveStatus::kUnsat;
  } else {
    throw SolverError("external solver gave no verdict (exit " +
                      std::to_string(exit_code) + "): " + cfg.external_cmd);
  }
  if (res.status == SolveStatus::kSat) {
    res.model.assign(f.num_vars + 1, 0);
    std::istringstream is(out);
    std::string line;
    while (std::getline(is, line)) {
      if (line.size() < 2 || line[0] != 'v' || line[1] != ' ') continue;
      std::istringstream ls(line.substr(2));
      long long l;
      while (ls >> l) {
        if (l == 0) continue;
        Var v = static_cast<Var>(l < 0 ? -l : l);
        if (v <= f.num_vars) res.model[v] = l > 0 ? 1 : 0;
      }
    }
    verify_against(f, assumptions, res.model);
  }
  return res;
}

}  // namespace

SolveResult solve(const CnfFormula& f, const std::vector<Lit>& assumptions,
                  const SolverConfig& cfg) {
  if (!cfg.external_cmd.empty()) return solve_external(f, assumptions, cfg);

  Solver s(cfg.seed);
  if (cfg.xor_native) {
    s.load(f);
  } else {
    CnfFormula blasted = f;
    blast_xors(blasted);
    s.load(blasted);
  }
  s.set_budget(cfg.max_conflicts, cfg.timeout_s);
  SolveResult res;
  res.status = s.solve(assumptions);
  if (res.status == SolveStatus::kSat) {
    res.model = s.model();
    res.model.resize(f.num_vars + 1);
  }
  return res;
}

EnumerationResult enumerate_models(const CnfFormula& f,
                                   const std::vector<Var>& projection,
                                   uint64_t limit, const SolverConfig& cfg) {
  for (Var v : projection) {
    if (v == 0 || v > f.num_vars) {
      throw SolverError("projection variable out of range");
    }
  }
  EnumerationResult out;
  uint32_t width = static_cast<uint32_t>(projection.size());

  auto extract = [&](const std::vector<uint8_t>& model) {
    BitVec b(width);
    for (uint32_t i = 0; i < width; i++) {
      b.set_bit(i, model[projection[i]] != 0);
    }
    return b;
  };
  auto blocking = [&](const BitVec& b) {
    Clause c;
    c.reserve(width);
    for (uint32_t i = 0; i < width; i++) {
      Lit v = static_cast<Lit>(projection[i]);
      c.push_back(b.bit(i) ? -v : v);
    }
    return c;
  };

  if (cfg.external_cmd.empty()) {
    Solver s(cfg.seed);
    if (cfg.xor_native) {
      s.load(f);
    } else {
      CnfFormula blasted = f;
      blast_xors(blasted);
      s.load(blasted);
    }
    s.set_budget(cfg.max_conflicts, cfg.timeout_s);
    while (true) {
      SolveStatus st = s.solve();
      if (st == SolveStatus::kUnknown) {
        out.budget_exhausted = true;
        return out;
      }
      if (st == SolveStatus::kUnsat) {
        out.complete = true;
        return out;
      }
      std::vector<uint8_t> m = s.model();
      if (out.models.size() >= limit) return out;  // more exist beyond limit
      out.models.push_back(extract(m));
      s.add_clause(blocking(out.models.back()));
    }
  }

  CnfFormula inst = f;
  while (true) {
    SolveResult r = solve(inst, {}, cfg);
    if (r.status == SolveStatus::kUnknown) {
      out.budget_exhausted = true;
      return out;
    }
    if (r.status == SolveStatus::kUnsat) {
      out.complete = true;
      return out;
    }
    if (out.models.size() >= limit) return out;
    out.models.push_back(extract(r.model));
    inst.add_clause(blocking(out.models.back()));
  }
}

}  // namespace mcfil
