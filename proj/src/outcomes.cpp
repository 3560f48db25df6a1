#include "mcfil/outcomes.hpp"

#include <algorithm>
#include <exception>
#include <string>
#include <thread>
#include <utility>

#include "mcfil/errors.hpp"

namespace mcfil {

namespace {

constexpr Var kVarCapacity = 1u << 22;

std::vector<Var> fresh_block(CnfFormula& f, uint32_t width) {
  std::vector<Var> vars;
  vars.reserve(width);
  for (uint32_t i = 0; i < width; i++) vars.push_back(f.new_var());
  return vars;
}

// One enable variable per candidate outcome. While e_j is assumed, copy j's
// cone output is pinned to its outcome value (and, with two target blocks,
// the blocks are forced distinct); with e_j free the copy's constraints are
// vacuously satisfiable, so dropping a candidate is just dropping its
// assumption. History cones stay hard: they only restrict that copy's own
// target block and are satisfiable as long as any candidate target survives.
struct GuardedCopies {
  CnfFormula formula;
  std::vector<Var> enables;
};

GuardedCopies build_guarded(const CnfFormula& base, const Circuit& circuit,
                            const std::vector<HistoryEntry>& history,
                            const std::vector<const BitVec*>& values,
                            uint32_t blocks) {
  GuardedCopies g;
  g.formula = base;
  InputBits chosen = InputBits::vars(base.bitmap.chosen);
  const uint32_t tw = circuit.target_width();
  for (const BitVec* value : values) {
    Var e = g.formula.new_var();
    std::vector<std::vector<Var>> tgt;
    for (uint32_t b = 0; b < blocks; b++) {
      tgt.push_back(fresh_block(g.formula, tw));
      InputBits ti = InputBits::vars(tgt.back());
      std::vector<Var> out =
          append_cone(g.formula, circuit, chosen, ti, std::nullopt);
      for (uint32_t i = 0; i < value->width(); i++) {
        Lit l = value->bit(i) ? static_cast<Lit>(out[i])
                              : -static_cast<Lit>(out[i]);
        g.formula.add_clause({-static_cast<Lit>(e), l});
      }
      for (const HistoryEntry& h : history) {
        append_cone(g.formula, circuit, InputBits::constant(h.query), ti,
                    h.result);
      }
    }
    if (blocks == 2) {
      Clause distinct{-static_cast<Lit>(e)};
      for (uint32_t i = 0; i < tw; i++) {
        Var d = g.formula.new_var();
        g.formula.add_xor({static_cast<Lit>(tgt[0][i]),
                           static_cast<Lit>(tgt[1][i]),
                           static_cast<Lit>(d)},
                          false);
        distinct.push_back(static_cast<Lit>(d));
      }
      g.formula.add_clause(std::move(distinct));
    }
    g.enables.push_back(e);
    if (g.formula.num_vars > kVarCapacity) {
      throw CnfError("select_outcomes: variable capacity exceeded (" +
                     std::to_string(g.formula.num_vars) + ")");
    }
  }
  return g;
}

// Drops the front (smallest-count) candidate while the remaining set is
// unsatisfiable under its enable assumptions, down to min_keep. `pos` holds
// indices into enables, already in ascending count order.
void drop_while_unsat(Solver& solver, const std::vector<Var>& enables,
                      std::vector<size_t>& pos, size_t min_keep) {
  while (pos.size() > min_keep) {
    std::vector<Lit> assume;
    assume.reserve(pos.size());
    for (size_t p : pos) assume.push_back(static_cast<Lit>(enables[p]));
    SolveStatus st = solver.solve(assume);
    if (st == SolveStatus::kUnknown) {
      throw SolverError("select_outcomes: solve budget exhausted");
    }
    if (st == SolveStatus::kSat) return;
    pos.erase(pos.begin());
  }
}

}  // namespace

OutcomeSet derive_outcomes(const CnfFormula& f, const Circuit& c, uint64_t cap,
                           const OutcomeConfig& cfg) {
  if (cap < 2) throw ConfigError("derive_outcomes: cap must be at least 2");
  if (f.bitmap.output.size() != c.output_width()) {
    throw CnfError("derive_outcomes: formula output bitmap does not match");
  }
  EnumerationResult er = enumerate_models(f, f.bitmap.output, cap, cfg.solver);
  if (er.budget_exhausted) {
    throw SolverError("derive_outcomes: solve budget exhausted");
  }
  OutcomeSet set;
  set.complete = er.complete;
  set.outcomes.reserve(er.models.size());
  for (BitVec& v : er.models) {
    set.outcomes.push_back(Outcome{std::move(v), CountEstimate{}, true});
  }
  std::sort(set.outcomes.begin(), set.outcomes.end(),
            [](const Outcome& a, const Outcome& b) { return a.value < b.value; });
  return set;
}

std::vector<Outcome> select_outcomes(const CnfFormula& f, const Circuit& c,
                                     const std::vector<HistoryEntry>& history,
                                     OutcomeSet& live,
                                     const OutcomeConfig& cfg) {
  if (f.bitmap.target.size() != c.target_width() ||
      f.bitmap.output.size() != c.output_width()) {
    throw CnfError("select_outcomes: formula bitmap does not match circuit");
  }
  const size_t n = live.outcomes.size();
  std::vector<size_t> todo;
  for (size_t i = 0; i < n; i++) {
    if (live.outcomes[i].alive) todo.push_back(i);
  }

  std::vector<CountEstimate> counts(n);
  auto count_one = [&](size_t i) {
    CnfFormula fo = f;
    const BitVec& v = live.outcomes[i].value;
    for (uint32_t b = 0; b < v.width(); b++) {
      Var ov = f.bitmap.output[b];
      fo.add_clause({v.bit(b) ? static_cast<Lit>(ov) : -static_cast<Lit>(ov)});
    }
    CountConfig cc;
    cc.solver = cfg.solver;
    cc.seed = cfg.seed;
    cc.purpose = "select.count";
    cc.call_index = cfg.call_index * 65536 + i;
    counts[i] = count_approx(fo, f.bitmap.target, cfg.epsilon, cfg.delta, cc);
  };

  if (cfg.workers > 1) {
    for (size_t at = 0; at < todo.size(); at += cfg.workers) {
      size_t batch = std::min<size_t>(cfg.workers, todo.size() - at);
      std::vector<std::exception_ptr> errs(batch);
      std::vector<std::thread> pool;
      pool.reserve(batch);
      for (size_t j = 0; j < batch; j++) {
        pool.emplace_back([&, j] {
          try {
            count_one(todo[at + j]);
          } catch (...) {
            errs[j] = std::current_exception();
          }
        });
      }
      for (auto& t : pool) t.join();
      for (auto& e : errs) {
        if (e) std::rethrow_exception(e);
      }
    }
  } else {
    for (size_t i : todo) count_one(i);
  }

  std::vector<size_t> order;
  for (size_t i : todo) {
    if (counts[i].unknown) {
      throw SolverError("select_outcomes: count budget exhausted");
    }
    live.outcomes[i].approx_count = counts[i];
    if (counts[i].count <= 0.0L) {
      live.outcomes[i].alive = false;
    } else {
      order.push_back(i);
    }
  }
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    long double ca = live.outcomes[a].approx_count.count;
    long double cb = live.outcomes[b].approx_count.count;
    if (ca != cb) return ca < cb;
    return live.outcomes[a].value < live.outcomes[b].value;
  });

  if (order.size() > 1) {
    std::vector<const BitVec*> values;
    values.reserve(order.size());
    for (size_t i : order) values.push_back(&live.outcomes[i].value);

    // Largest co-satisfiable suffix: one forced copy per candidate.
    GuardedCopies cosat = build_guarded(f, c, history, values, 1);
    Solver s1(cfg.seed);
    s1.load(cosat.formula);
    s1.set_budget(cfg.solver.max_conflicts, cfg.solver.timeout_s);
    std::vector<size_t> pos(values.size());
    for (size_t j = 0; j < pos.size(); j++) pos[j] = j;
    drop_while_unsat(s1, cosat.enables, pos, 1);

    // Refinement: also require two distinct candidate targets per class
    // under one common chosen input, so each surviving class can still
    // split. Without this, classes pinned to a single target crowd out the
    // informative ones. Never refines below a pair.
    if (pos.size() > 2) {
      std::vector<const BitVec*> vals2;
      vals2.reserve(pos.size());
      for (size_t p : pos) vals2.push_back(values[p]);
      GuardedCopies pairsat = build_guarded(f, c, history, vals2, 2);
      Solver s2(cfg.seed);
      s2.load(pairsat.formula);
      s2.set_budget(cfg.solver.max_conflicts, cfg.solver.timeout_s);
      std::vector<size_t> pos2(vals2.size());
      for (size_t j = 0; j < pos2.size(); j++) pos2[j] = j;
      drop_while_unsat(s2, pairsat.enables, pos2, 2);
      std::vector<size_t> kept;
      kept.reserve(pos2.size());
      for (size_t p : pos2) kept.push_back(pos[p]);
      pos = std::move(kept);
    }

    if (pos.size() > 1) {
      std::vector<Lit> assume;
      for (size_t p : pos) assume.push_back(static_cast<Lit>(cosat.enables[p]));
      if (s1.solve(assume) != SolveStatus::kSat) {
        throw SolverError("select_outcomes: survivors not co-satisfiable");
      }
    }

    std::vector<size_t> surviving;
    surviving.reserve(pos.size());
    for (size_t p : pos) surviving.push_back(order[p]);
    order = std::move(surviving);
  }

  std::vector<Outcome> selected;
  selected.reserve(order.size());
  for (size_t i : order) selected.push_back(live.outcomes[i]);
  return selected;
}

}  // namespace mcfil
