#include "mcfil/maxquery.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "mcfil/counting.hpp"
#include "mcfil/errors.hpp"
#include "mcfil/rng.hpp"
#include "mcfil/solver.hpp"

namespace mcfil {

namespace {

constexpr Var kVarCapacity = 1u << 22;

std::vector<Var> fresh_block(CnfFormula& f, uint32_t width) {
  std::vector<Var> vars;
  vars.reserve(width);
  for (uint32_t i = 0; i < width; i++) vars.push_back(f.new_var());
  return vars;
}

BitVec chosen_from_model(const CnfFormula& base,
                         const std::vector<uint8_t>& model) {
  const std::vector<Var>& cv = base.bitmap.chosen;
  BitVec out(static_cast<uint32_t>(cv.size()));
  for (uint32_t i = 0; i < cv.size(); i++) out.set_bit(i, model[cv[i]] != 0);
  return out;
}

}  // namespace

CopyInstance instantiate_copies(const CnfFormula& base, const Circuit& circuit,
                                const std::vector<HistoryEntry>& history,
                                const std::vector<BitVec>& outcomes) {
  if (outcomes.empty()) {
    throw ConfigError("instantiate_copies: no outcomes");
  }
  for (size_t i = 0; i < outcomes.size(); i++) {
    for (size_t j = i + 1; j < outcomes.size(); j++) {
      if (outcomes[i] == outcomes[j]) {
        throw ConfigError("instantiate_copies: duplicate outcome " +
                          outcomes[i].to_hex());
      }
    }
  }
  if (base.bitmap.chosen.size() != circuit.chosen_width()) {
    throw CnfError("instantiate_copies: base formula lacks the circuit's "
                   "chosen bitmap");
  }
  CopyInstance ci;
  ci.formula = base;
  InputBits chosen = InputBits::vars(base.bitmap.chosen);
  for (const BitVec& outcome : outcomes) {
    OutcomeCopy copy;
    copy.outcome = outcome;
    copy.target_copy = fresh_block(ci.formula, circuit.target_width());
    InputBits tgt = InputBits::vars(copy.target_copy);
    append_cone(ci.formula, circuit, chosen, tgt, outcome);
    for (const HistoryEntry& h : history) {
      append_cone(ci.formula, circuit, InputBits::constant(h.query), tgt,
                  h.result);
    }
    if (ci.formula.num_vars > kVarCapacity) {
      throw CnfError("instantiate_copies: variable capacity exceeded (" +
                     std::to_string(ci.formula.num_vars) + ")");
    }
    ci.copies.push_back(std::move(copy));
  }
  return ci;
}

namespace {

// All hash draws for one synthesis: hashes[j][l] is copy j's level-l+1
// constraint. Prefixes are reused across k levels.
std::vector<std::vector<HashConstraint>> draw_hashes(
    const CopyInstance& ci, uint32_t levels, const MaxQueryConfig& cfg) {
  std::vector<std::vector<HashConstraint>> hs(ci.copies.size());
  for (size_t j = 0; j < ci.copies.size(); j++) {
    RngStream rng(cfg.seed, "maxquery.hash", cfg.call_index * 4096 + j);
    hs[j].reserve(levels);
    for (uint32_t l = 0; l < levels; l++) {
      hs[j].push_back(sample_hash(ci.copies[j].target_copy, rng));
    }
  }
  return hs;
}

CnfFormula instance_at(const CopyInstance& ci,
                       const std::vector<std::vector<HashConstraint>>& hs,
                       uint32_t k) {
  CnfFormula f = ci.formula;
  for (size_t j = 0; j < ci.copies.size(); j++) {
    for (uint32_t l = 0; l < k; l++) {
      std::vector<Lit> lits;
      for (Var v : hs[j][l].vars) lits.push_back(static_cast<Lit>(v));
      f.add_xor(lits, hs[j][l].rhs);
    }
  }
  return f;
}

struct LevelProbe {
  bool sat = false;
  bool unknown = false;
  std::vector<uint8_t> model;
  std::exception_ptr error;
};

// Parallel sweep: every k level solved on its own formula clone; results
// joined by index, so thread scheduling cannot change the outcome.
std::optional<std::pair<uint32_t, std::vector<uint8_t>>> sweep_parallel(
    const CopyInstance& ci,
    const std::vector<std::vector<HashConstraint>>& hs, uint32_t levels,
    const MaxQueryConfig& cfg) {
  std::vector<LevelProbe> probes(levels + 1);
  uint32_t next = 0;
  while (next <= levels) {
    uint32_t batch = std::min<uint32_t>(cfg.workers, levels + 1 - next);
    std::vector<std::thread> pool;
    for (uint32_t b = 0; b < batch; b++) {
      uint32_t k = next + b;
      pool.emplace_back([&, k] {
        try {
          CnfFormula f = instance_at(ci, hs, k);
          SolveResult r = solve(f, {}, cfg.solver);
          probes[k].sat = r.status == SolveStatus::kSat;
          probes[k].unknown = r.status == SolveStatus::kUnknown;
          if (probes[k].sat) probes[k].model = std::move(r.model);
        } catch (...) {
          probes[k].error = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    next += batch;
  }
  for (const LevelProbe& p : probes) {
    if (p.error) std::rethrow_exception(p.error);
    if (p.unknown) throw SolverError("maximize_query hit the solve budget");
  }
  for (uint32_t k = levels + 1; k-- > 0;) {
    if (probes[k].sat) return std::make_pair(k, std::move(probes[k].model));
  }
  return std::nullopt;
}

// Serial path: one incremental solver; level l's hashes carry a slack
// variable silenced by assuming the level's enable literal, so any k prefix
// is a set of assumptions rather than a fresh formula.
std::optional<std::pair<uint32_t, std::vector<uint8_t>>> sweep_incremental(
    const CopyInstance& ci,
    const std::vector<std::vector<HashConstraint>>& hs, uint32_t levels,
    const MaxQueryConfig& cfg) {
  Solver s(cfg.solver.seed);
  CnfFormula guarded = ci.formula;
  std::vector<Var> enable;
  enable.reserve(levels);
  for (uint32_t l = 0; l < levels; l++) {
    Var e = guarded.new_var();
    enable.push_back(e);
    for (size_t j = 0; j < ci.copies.size(); j++) {
      Var slack = guarded.new_var();
      std::vector<Lit> lits;
      for (Var v : hs[j][l].vars) lits.push_back(static_cast<Lit>(v));
      lits.push_back(static_cast<Lit>(slack));
      guarded.add_xor(lits, hs[j][l].rhs);
      guarded.add_clause(
          {-static_cast<Lit>(e), -static_cast<Lit>(slack)});
    }
  }
  s.load(guarded);
  s.set_budget(cfg.solver.max_conflicts, cfg.solver.timeout_s);

  auto solve_at = [&](uint32_t k) {
    std::vector<Lit> assumptions;
    for (uint32_t l = 0; l < k; l++) {
      assumptions.push_back(static_cast<Lit>(enable[l]));
    }
    SolveStatus st = s.solve(assumptions);
    if (st == SolveStatus::kUnknown) {
      throw SolverError("maximize_query hit the solve budget");
    }
    return st == SolveStatus::kSat;
  };

  if (!solve_at(0)) return std::nullopt;
  uint32_t best = 0;
  std::vector<uint8_t> best_model = s.model();
  // satisfiability is monotone non-increasing in k (prefix hashing), so
  // gallop to the first UNSAT level, then bisect
  uint32_t lo = 0, hi = levels + 1;  // lo SAT, hi UNSAT (one past the end)
  uint32_t step = 1;
  while (lo + step <= levels) {
    uint32_t k = lo + step;
    if (solve_at(k)) {
      lo = k;
      best = k;
      best_model = s.model();
      step *= 2;
    } else {
      hi = k;
      break;
    }
  }
  if (hi == levels + 1 && lo < levels) {
    if (solve_at(levels)) {
      lo = levels;
      best = levels;
      best_model = s.model();
    } else {
      hi = levels;
    }
  }
  while (hi > lo + 1) {
    uint32_t mid = lo + (hi - lo) / 2;
    if (solve_at(mid)) {
      lo = mid;
      best = mid;
      best_model = s.model();
    } else {
      hi = mid;
    }
  }
  return std::make_pair(best, std::move(best_model));
}

}  // namespace

std::optional<QuerySynthesis> maximize_query(
    const CnfFormula& base, const Circuit& circuit,
    const std::vector<HistoryEntry>& history,
    const std::vector<BitVec>& selected, const MaxQueryConfig& cfg) {
  CopyInstance ci = instantiate_copies(base, circuit, history, selected);
  uint32_t levels = circuit.target_width();
  auto hs = draw_hashes(ci, levels, cfg);

  auto found = cfg.workers > 1 ? sweep_parallel(ci, hs, levels, cfg)
                               : sweep_incremental(ci, hs, levels, cfg);
  if (!found) return std::nullopt;

  BitVec chosen = chosen_from_model(base, found->second);

  // A model at the frontier is marginal by construction, so the first one
  // the solver returns is often a lopsided split whose smallest class got a
  // lucky cell. Re-solve the frontier instance with the already-seen chosen
  // values blocked to collect distinct candidates, then keep the one
  // maximizing the actual objective, the product of per-outcome class
  // counts.
  if (found->first > 0 && selected.size() > 1) {
    std::vector<BitVec> cands{chosen};
    CnfFormula alt = instance_at(ci, hs, found->first);
    for (uint32_t extra = 0; extra < 3; extra++) {
      std::vector<Lit> block;
      block.reserve(base.bitmap.chosen.size());
      const BitVec& prev = cands.back();
      for (size_t i = 0; i < base.bitmap.chosen.size(); i++) {
        Lit v = static_cast<Lit>(base.bitmap.chosen[i]);
        block.push_back(prev.bit(i) ? -v : v);
      }
      alt.add_clause(block);
      SolveResult r = solve(alt, {}, cfg.solver);
      if (r.status != SolveStatus::kSat) break;
      cands.push_back(chosen_from_model(base, r.model));
    }
    if (cands.size() > 1) {
      long double best_score = -1.0L;
      for (size_t ci2 = 0; ci2 < cands.size(); ci2++) {
        long double score = 0.0L;
        for (size_t j = 0; j < ci.copies.size(); j++) {
          CnfFormula fo = base;
          append_cone(fo, circuit, InputBits::constant(cands[ci2]),
                      InputBits::vars(base.bitmap.target),
                      ci.copies[j].outcome);
          CountConfig cc;
          cc.solver = cfg.solver;
          cc.seed = cfg.seed;
          cc.purpose = "maxquery.score";
          cc.call_index = cfg.call_index * 4096 + ci2 * 256 + j;
          CountEstimate est =
              count_approx(fo, base.bitmap.target, 0.8, 0.2, cc);
          score += std::log2(1.0L + (est.unknown ? 0.0L : est.count));
        }
        if (score > best_score) {
          best_score = score;
          chosen = cands[ci2];
        }
      }
    }
  }

  QuerySynthesis qs;
  qs.k_max = found->first;
  qs.chosen_value = std::move(chosen);
  qs.instance = instance_at(ci, hs, qs.k_max);
  qs.copies = std::move(ci.copies);
  for (size_t j = 0; j < qs.copies.size(); j++) {
    qs.copies[j].hashes.assign(hs[j].begin(), hs[j].begin() + qs.k_max);
  }
  return qs;
}

}  // namespace mcfil
