// End-to-end acceptance suite. Each criterion is one scenario run at its
// stated tolerance; invoke with the criterion number (1..10) as the only
// argument. Prints exactly one PASS/FAIL line per criterion.
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mcfil/attack.hpp"
#include "mcfil/counting.hpp"
#include "mcfil/functionality.hpp"
#include "mcfil/rng.hpp"
#include "mcfil/solver.hpp"

using namespace mcfil;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
  void note(const std::string& info) {
    if (ok) detail = info;
  }
  void require(bool cond, const std::string& why) {
    if (!cond) fail(why);
  }
};

BitVec random_target(uint32_t width, uint64_t seed) {
  RngStream rng(seed, "acceptance.target", 0);
  BitVec v(width, 0);
  for (uint32_t i = 0; i < width; i++) v.set_bit(i, rng.next_bit());
  return v;
}

// Exact surviving counts per iteration, by filtering the full target space
// through the recorded query history with the concrete evaluator.
std::vector<uint64_t> surviving_series(const Functionality& fn,
                                       const std::vector<QueryRecord>& trace) {
  std::vector<uint64_t> live;
  for (uint64_t t = 0; t < (uint64_t{1} << fn.target_width); t++) live.push_back(t);
  std::vector<uint64_t> series;
  for (const QueryRecord& r : trace) {
    std::vector<uint64_t> next;
    for (uint64_t t : live) {
      if (fn.eval(r.chosen, BitVec(fn.target_width, t)) == r.result) {
        next.push_back(t);
      }
    }
    live.swap(next);
    series.push_back(live.size());
  }
  return series;
}

// Pooled mean of per-iteration surviving ratios across runs, starting from
// the full space.
double mean_ratio(const std::vector<std::vector<uint64_t>>& all_series,
                  uint32_t width) {
  double sum = 0.0;
  uint64_t n = 0;
  for (const std::vector<uint64_t>& s : all_series) {
    long double prev = std::pow(2.0L, width);
    for (uint64_t v : s) {
      sum += static_cast<double>(static_cast<long double>(v) / prev);
      prev = static_cast<long double>(v);
      n++;
      if (prev == 0.0L) break;
    }
  }
  return n ? sum / static_cast<double>(n) : 1.0;
}

std::set<uint64_t> formula_targets(const CnfFormula& f, uint64_t limit) {
  SolverConfig cfg;
  EnumerationResult r = enumerate_models(f, f.bitmap.target, limit, cfg);
  std::set<uint64_t> s;
  if (!r.complete) return s;
  for (const BitVec& m : r.models) s.insert(m.to_u64());
  return s;
}

// CSV with the wall-clock column blanked; everything else must be
// byte-stable across runs.
std::string masked_csv(const AttackState& st) {
  std::ostringstream raw;
  write_trace_csv(st, raw);
  std::istringstream in(raw.str());
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    size_t cut = line.rfind(',');
    out << line.substr(0, cut) << ",-\n";
  }
  return out.str();
}

std::string masked_json(const AttackState& st) {
  std::ostringstream raw;
  write_trace_json(st, raw);
  nlohmann::ordered_json doc = nlohmann::ordered_json::parse(raw.str());
  for (auto& row : doc["trace"]) row.erase("elapsed_ms");
  return doc.dump(2);
}

// ---------------------------------------------------------------- criteria

Check criterion_1() {
  Check c;
  Functionality f = and_gate();
  for (uint64_t hidden : {0ull, 1ull}) {
    LocalOracle oracle(f, BitVec(1, hidden));
    AttackConfig cfg;
    AttackState st = run_attack(f, oracle, cfg);
    c.require(st.status == AttackStatus::kUnique,
              "hidden " + std::to_string(hidden) + " not UNIQUE");
    c.require(st.trace.size() == 1,
              "hidden " + std::to_string(hidden) + " took " +
                  std::to_string(st.trace.size()) + " queries");
    c.require(!st.trace.empty() && st.trace[0].chosen.to_u64() == 1,
              "query was not chosen = 1");
    c.require(st.witness && st.witness->to_u64() == hidden, "wrong witness");
  }
  c.note("both targets: 1 query, chosen = 1");
  return c;
}

Check criterion_2() {
  Check c;
  Functionality f = millionaires(16);
  std::vector<std::vector<uint64_t>> all_series;
  size_t max_q = 0;
  for (uint64_t i = 0; i < 50; i++) {
    BitVec hidden = random_target(16, 7000 + i);
    LocalOracle oracle(f, hidden);
    AttackConfig cfg;
    cfg.seed = i;
    AttackState st = run_attack(f, oracle, cfg);
    if (st.status != AttackStatus::kUnique || !st.witness ||
        !(*st.witness == hidden)) {
      c.fail("run " + std::to_string(i) + ": " + status_name(st.status));
      break;
    }
    max_q = std::max(max_q, st.trace.size());
    if (st.trace.size() > 24) {
      c.fail("run " + std::to_string(i) + " used " +
             std::to_string(st.trace.size()) + " queries (> 24)");
      break;
    }
    all_series.push_back(surviving_series(f, st.trace));
  }
  double ratio = mean_ratio(all_series, 16);
  c.require(ratio <= 0.75, "mean surviving ratio " + std::to_string(ratio));
  char buf[96];
  std::snprintf(buf, sizeof buf, "50/50 UNIQUE, max %zu queries, mean ratio %.3f",
                max_q, ratio);
  c.note(buf);
  return c;
}

Check criterion_3() {
  Check c;
  Functionality f = mean_average(8);
  int fast = 0;
  for (uint64_t i = 0; i < 50; i++) {
    BitVec hidden = random_target(8, 3000 + i);
    LocalOracle oracle(f, hidden);
    AttackConfig cfg;
    cfg.seed = i;
    AttackState st = run_attack(f, oracle, cfg);
    if (st.status == AttackStatus::kUnique && st.witness &&
        *st.witness == hidden && st.trace.size() <= 3) {
      fast++;
    }
  }
  c.require(fast >= 45, "only " + std::to_string(fast) +
                            "/50 runs finished UNIQUE in <= 3 queries");

  // width-2 selection behavior: extremes dropped, middle kept
  Functionality g = mean_average(2);
  Circuit circ = g.build();
  CnfFormula base = tseitin_compile(circ);
  OutcomeConfig ocfg;
  OutcomeSet live = derive_outcomes(base, circ, 16, ocfg);
  std::vector<Outcome> sel = select_outcomes(base, circ, {}, live, ocfg);
  std::set<uint64_t> kept;
  for (const Outcome& o : sel) kept.insert(o.value.to_u64());
  c.require(kept == std::set<uint64_t>{1, 2},
            "width-2 selection kept the wrong outcomes");
  c.note(std::to_string(fast) + "/50 in <= 3 queries; width-2 kept {1,2}");
  return c;
}

Check criterion_4() {
  Check c;
  {
    Functionality f = dual_execution_affine(3);
    for (uint64_t i = 0; i < 30; i++) {
      BitVec hidden = random_target(3, 4000 + i);
      LocalOracle oracle(f, hidden);
      AttackConfig cfg;
      cfg.seed = i;
      AttackState st = run_attack(f, oracle, cfg);
      if (st.status != AttackStatus::kUnique || !st.witness ||
          !(*st.witness == hidden)) {
        c.fail("dim 3 run " + std::to_string(i) + ": " +
               status_name(st.status));
        return c;
      }
    }
  }
  size_t runs12 = 5, max_q = 0;
  {
    Functionality f = dual_execution_affine(12);
    for (uint64_t i = 0; i < runs12; i++) {
      BitVec hidden = random_target(12, 5000 + i);
      LocalOracle oracle(f, hidden);
      AttackConfig cfg;
      cfg.seed = i;
      cfg.max_iters = 80;
      AttackState st = run_attack(f, oracle, cfg);
      if (st.status != AttackStatus::kUnique || !st.witness ||
          !(*st.witness == hidden) || st.trace.size() > 80) {
        c.fail("dim 12 run " + std::to_string(i) + ": " +
               status_name(st.status) + " after " +
               std::to_string(st.trace.size()) + " queries");
        return c;
      }
      max_q = std::max(max_q, st.trace.size());
    }
  }
  c.note("dim 3: 30/30 UNIQUE; dim 12: " + std::to_string(runs12) +
         "/" + std::to_string(runs12) + " UNIQUE, max " +
         std::to_string(max_q) + " queries");
  return c;
}

Check criterion_5() {
  Check c;
  Functionality f = bucketed_mean(12, 16);
  BitVec hidden = random_target(12, 77);
  LocalOracle oracle(f, hidden);
  AttackConfig cfg;
  AttackState st = run_attack(f, oracle, cfg);
  c.require(st.status == AttackStatus::kBruteForce,
            std::string("status ") + status_name(st.status));
  uint64_t base = hidden.to_u64() & ~uint64_t{15};
  std::set<uint64_t> bucket;
  for (uint64_t t = base; t < base + 16; t++) bucket.insert(t);
  std::set<uint64_t> survivors = formula_targets(st.formula, 64);
  c.require(survivors == bucket, "surviving set is not the hidden bucket");
  c.note("halted " + std::string(status_name(st.status)) + "; survivors = bucket of " +
         std::to_string(base));
  return c;
}

Check criterion_6() {
  Check c;
  double means[2] = {0, 0};
  for (int variant = 0; variant < 2; variant++) {
    Functionality f = wage(12, variant == 0 ? WageVariant::kStandardDiv
                                            : WageVariant::kCircuitDiv);
    std::vector<std::vector<uint64_t>> all_series;
    for (uint64_t i = 0; i < 30; i++) {
      BitVec hidden = random_target(12, 6000 + i);
      LocalOracle oracle(f, hidden);
      AttackConfig cfg;
      cfg.seed = i;
      AttackState st = run_attack(f, oracle, cfg);
      if (st.status == AttackStatus::kAborted) {
        c.fail("variant " + std::to_string(variant) + " run " +
               std::to_string(i) + " aborted: " + st.diagnostic);
        return c;
      }
      std::vector<uint64_t> series = surviving_series(f, st.trace);
      // top half of the target bits must be pinned by the final history
      std::vector<uint64_t> live;
      for (uint64_t t = 0; t < 4096; t++) live.push_back(t);
      for (const QueryRecord& r : st.trace) {
        std::vector<uint64_t> next;
        for (uint64_t t : live) {
          if (f.eval(r.chosen, BitVec(12, t)) == r.result) next.push_back(t);
        }
        live.swap(next);
      }
      std::set<uint64_t> tops;
      for (uint64_t t : live) tops.insert(t >> 6);
      if (tops.size() != 1) {
        c.fail("variant " + std::to_string(variant) + " run " +
               std::to_string(i) + ": top half not unique (" +
               std::to_string(tops.size()) + " values)");
        return c;
      }
      all_series.push_back(std::move(series));
    }
    means[variant] = mean_ratio(all_series, 12);
  }
  double gap = std::fabs(means[0] - means[1]);
  c.require(gap <= 0.1, "variant mean ratios differ by " + std::to_string(gap));
  char buf[96];
  std::snprintf(buf, sizeof buf,
                "mean ratios %.3f (std div) vs %.3f (circuit div), gap %.3f",
                means[0], means[1], gap);
  c.note(buf);
  return c;
}

Check criterion_7() {
  Check c;
  RngStream rng(424242, "acceptance.counting", 0);
  int within = 0;
  for (int i = 0; i < 100; i++) {
    CnfFormula f;
    uint32_t vars = 8 + rng.next_u64() % 8;
    f.num_vars = vars;
    uint32_t clauses = 3 + rng.next_u64() % (2 * vars);
    for (uint32_t j = 0; j < clauses; j++) {
      Clause cl;
      uint32_t len = 1 + rng.next_u64() % 3;
      for (uint32_t k = 0; k < len; k++) {
        Var v = 1 + rng.next_u64() % vars;
        cl.push_back(rng.next_bit() ? static_cast<Lit>(v)
                                    : -static_cast<Lit>(v));
      }
      f.add_clause(cl);
    }
    std::vector<Var> proj;
    for (Var v = 1; v <= vars; v++) proj.push_back(v);

    CountConfig cc;
    cc.purpose = "acceptance.c7";
    cc.call_index = static_cast<uint64_t>(i);
    CountEstimate exact = count_exact(f, proj, cc);
    CountEstimate approx = count_approx(f, proj, 0.8, 0.2, cc);
    if (approx.unknown) continue;
    long double lo = exact.count / 1.8L, hi = exact.count * 1.8L;
    if (approx.count >= lo && approx.count <= hi) within++;
  }
  c.require(within >= 85, "only " + std::to_string(within) +
                              "/100 estimates within tolerance");

  // hash halving: one sampled parity cuts a 2^10 free space roughly in half
  CnfFormula free10;
  free10.num_vars = 10;
  std::vector<Var> proj;
  for (Var v = 1; v <= 10; v++) proj.push_back(v);
  long double mean = 0.0L;
  int trials = 200;
  for (int i = 0; i < trials; i++) {
    CountConfig cc;
    cc.purpose = "acceptance.halving";
    cc.call_index = static_cast<uint64_t>(i);
    CnfFormula g = free10;
    HashConstraint h = sample_hash(proj, 1, cc);
    if (h.vars.empty()) {
      mean += h.rhs ? 0.0L : 1024.0L;
      continue;
    }
    std::vector<Lit> lits;
    for (Var v : h.vars) lits.push_back(static_cast<Lit>(v));
    g.add_xor(lits, h.rhs);
    CountConfig ce = cc;
    ce.purpose = "acceptance.halving.exact";
    mean += count_exact(g, proj, ce).count;
  }
  mean /= trials;
  c.require(mean >= 462.0L && mean <= 562.0L,
            "halving mean " + std::to_string(static_cast<double>(mean)));
  char buf[96];
  std::snprintf(buf, sizeof buf, "%d/100 within tolerance; halving mean %.1f",
                within, static_cast<double>(mean));
  c.note(buf);
  return c;
}

Check criterion_8() {
  Check c;
  std::vector<Functionality> fns;
  fns.push_back(and_gate());
  fns.push_back(millionaires(4));
  fns.push_back(millionaires(6));
  fns.push_back(mean_average(2));
  fns.push_back(mean_average(4));
  fns.push_back(mean_average(6));
  fns.push_back(bucketed_mean(4, 4));
  fns.push_back(bucketed_mean(6, 4));
  fns.push_back(wage(4, WageVariant::kStandardDiv));
  fns.push_back(wage(6, WageVariant::kStandardDiv));
  fns.push_back(wage(6, WageVariant::kCircuitDiv));
  fns.push_back(dual_execution_affine(2));
  fns.push_back(sugar_beets(2, 1, 1, 1, 1, 1));
  SolverConfig scfg;
  for (const Functionality& fn : fns) {
    std::string tag = fn.name + "(t" + std::to_string(fn.target_width) + ")";
    Circuit circ = fn.build();
    CnfFormula base = tseitin_compile(circ);

    // (a) exhaustive Tseitin equisatisfiability
    for (uint64_t cv = 0; cv < (uint64_t{1} << fn.chosen_width); cv++) {
      for (uint64_t tv = 0; tv < (uint64_t{1} << fn.target_width); tv++) {
        std::vector<Lit> assume;
        BitVec cb(fn.chosen_width, cv), tb(fn.target_width, tv);
        for (uint32_t i = 0; i < fn.chosen_width; i++) {
          Lit l = static_cast<Lit>(base.bitmap.chosen[i]);
          assume.push_back(cb.bit(i) ? l : -l);
        }
        for (uint32_t i = 0; i < fn.target_width; i++) {
          Lit l = static_cast<Lit>(base.bitmap.target[i]);
          assume.push_back(tb.bit(i) ? l : -l);
        }
        SolveResult r = solve(base, assume, scfg);
        if (r.status != SolveStatus::kSat) {
          c.fail(tag + ": inputs " + std::to_string(cv) + "," +
                 std::to_string(tv) + " unsatisfiable");
          return c;
        }
        BitVec expect = fn.eval(cb, tb);
        for (uint32_t i = 0; i < fn.output_width; i++) {
          if (r.value(base.bitmap.output[i]) != expect.bit(i)) {
            c.fail(tag + ": output mismatch at " + std::to_string(cv) + "," +
                   std::to_string(tv));
            return c;
          }
        }
      }
    }

    // (b) symbolic/concrete agreement
    try {
      validate_agreement(fn, 3);
    } catch (const std::exception& e) {
      c.fail(tag + ": agreement: " + e.what());
      return c;
    }

    // (c)+(d) attack elimination matches enumeration, true target survives
    BitVec hidden = random_target(fn.target_width, 0xace0 + fn.target_width);
    LocalOracle oracle(fn, hidden);
    AttackConfig acfg;
    acfg.exact_trace = true;
    AttackState st = run_attack(fn, oracle, acfg);
    if (st.status == AttackStatus::kAborted) {
      c.fail(tag + ": attack aborted: " + st.diagnostic);
      return c;
    }
    std::vector<uint64_t> live;
    for (uint64_t t = 0; t < (uint64_t{1} << fn.target_width); t++) {
      live.push_back(t);
    }
    for (size_t i = 0; i < st.trace.size(); i++) {
      std::vector<uint64_t> next;
      for (uint64_t t : live) {
        if (fn.eval(st.trace[i].chosen, BitVec(fn.target_width, t)) ==
            st.trace[i].result) {
          next.push_back(t);
        }
      }
      live.swap(next);
      if (st.trace[i].remaining.count !=
          static_cast<long double>(live.size())) {
        c.fail(tag + ": iteration " + std::to_string(i) +
               " count mismatch");
        return c;
      }
      if (!std::count(live.begin(), live.end(), hidden.to_u64())) {
        c.fail(tag + ": true target eliminated at iteration " +
               std::to_string(i));
        return c;
      }
    }
    if (st.status == AttackStatus::kUnique &&
        (!st.witness || !(*st.witness == hidden))) {
      c.fail(tag + ": wrong witness");
      return c;
    }
  }
  c.note(std::to_string(fns.size()) + " functionality instances checked");
  return c;
}

Check criterion_9() {
  Check c;
  const char* cli = std::getenv("MCFIL_CLI_PATH");
  if (!cli) {
    c.fail("MCFIL_CLI_PATH not set");
    return c;
  }
  struct Scenario {
    Functionality fn;
    uint64_t reference;  // same-width clause count to stay within 10x of
    uint64_t max_iters;  // 0: default budget
  };
  std::vector<Scenario> scenarios;
  scenarios.push_back({millionaires(8), 47, 0});
  scenarios.push_back({millionaires(16), 95, 0});
  scenarios.push_back({mean_average(8), 191, 0});
  scenarios.push_back({dual_execution_affine(8), 875, 3});
  scenarios.push_back({bucketed_mean(8, 16), 457, 0});

  std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "mcfil_acceptance_9";
  std::filesystem::remove_all(dir);
  size_t files = 0;
  for (Scenario& sc : scenarios) {
    BitVec hidden = random_target(sc.fn.target_width, 0xbe11);
    LocalOracle oracle(sc.fn, hidden);
    AttackConfig cfg;
    cfg.max_iters = sc.max_iters;
    AttackState st = run_attack(sc.fn, oracle, cfg);
    if (st.status == AttackStatus::kAborted || st.instances.empty()) {
      c.fail(sc.fn.name + ": no instances exported");
      break;
    }
    std::string sub = (dir / (sc.fn.name + std::to_string(sc.fn.target_width)))
                          .string();
    std::vector<std::string> paths = export_benchmarks(st, sub);
    uint64_t iter0_clauses = st.instances[0].clauses.size();
    if (iter0_clauses * 10 < sc.reference || iter0_clauses > sc.reference * 10) {
      c.fail(sc.fn.name + std::to_string(sc.fn.target_width) + ": iter-0 " +
             std::to_string(iter0_clauses) + " clauses vs reference " +
             std::to_string(sc.reference));
      break;
    }
    for (size_t i = 0; i < paths.size(); i++) {
      std::ifstream in(paths[i], std::ios::binary);
      CnfFormula g = read_dimacs(in);
      if (g.num_vars != st.instances[i].num_vars ||
          g.clauses.size() != st.instances[i].clauses.size() ||
          g.xors.size() != st.instances[i].xors.size()) {
        c.fail(paths[i] + ": round-trip mismatch");
        break;
      }
      SolverConfig builtin;
      if (solve(g, {}, builtin).status != SolveStatus::kSat) {
        c.fail(paths[i] + ": not SAT under builtin backend");
        break;
      }
      SolverConfig ext;
      ext.external_cmd = std::string(cli) + " solve {cnf_path}";
      if (solve(g, {}, ext).status != SolveStatus::kSat) {
        c.fail(paths[i] + ": not SAT under external backend");
        break;
      }
      files++;
    }
    if (!c.ok) break;
  }
  std::filesystem::remove_all(dir);
  if (c.ok) {
    c.note(std::to_string(files) +
           " CNFs round-tripped, SAT under both backends, sizes in range");
  }
  return c;
}

Check criterion_10() {
  Check c;
  struct Scenario {
    Functionality fn;
    BitVec hidden;
  };
  std::vector<Scenario> scenarios;
  scenarios.push_back({and_gate(), BitVec(1, 1)});
  scenarios.push_back({millionaires(16), BitVec(16, 47291 & 0xffff)});
  scenarios.push_back({mean_average(8), BitVec(8, 0x9d)});
  for (Scenario& sc : scenarios) {
    std::string csv[2], json[2];
    for (int rep = 0; rep < 2; rep++) {
      LocalOracle oracle(sc.fn, sc.hidden);
      AttackConfig cfg;
      cfg.seed = 11;
      AttackState st = run_attack(sc.fn, oracle, cfg);
      if (st.status != AttackStatus::kUnique) {
        c.fail(sc.fn.name + ": run " + std::to_string(rep) + " was " +
               status_name(st.status));
        return c;
      }
      csv[rep] = masked_csv(st);
      json[rep] = masked_json(st);
    }
    c.require(csv[0] == csv[1], sc.fn.name + ": CSV traces differ");
    c.require(json[0] == json[1], sc.fn.name + ": JSON traces differ");
  }
  c.note("3 scenarios byte-identical across consecutive runs");
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: acceptance <criterion 1..10>\n");
    return 2;
  }
  int n = std::atoi(argv[1]);
  Check (*criteria[])() = {criterion_1, criterion_2, criterion_3, criterion_4,
                           criterion_5, criterion_6, criterion_7, criterion_8,
                           criterion_9, criterion_10};
  if (n < 1 || n > 10) {
    std::fprintf(stderr, "usage: acceptance <criterion 1..10>\n");
    return 2;
  }
  Check c = criteria[n - 1]();
  std::printf("%s criterion %d%s%s\n", c.ok ? "PASS" : "FAIL", n,
              c.detail.empty() ? "" : ": ", c.detail.c_str());
  return c.ok ? 0 : 1;
}
