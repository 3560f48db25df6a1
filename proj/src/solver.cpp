#include "mcfil/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <unordered_map>

#include "mcfil/errors.hpp"
#include "mcfil/rng.hpp"

namespace mcfil {

const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::kSat: return "SAT";
    case SolveStatus::kUnsat: return "UNSAT";
    case SolveStatus::kUnknown: return "UNKNOWN";
  }
  return "?";
}

namespace {

// Internal literal: var*2 (positive) or var*2+1 (negated), vars 0-based.
using ILit = uint32_t;
constexpr ILit kLitUndef = ~ILit{0};
inline ILit neg(ILit l) { return l ^ 1; }
inline uint32_t ivar(ILit l) { return l >> 1; }
inline ILit mk_ilit(uint32_t v, bool negated) {
  return (v << 1) | (negated ? 1 : 0);
}
inline ILit from_dimacs(Lit l) {
  return mk_ilit(static_cast<uint32_t>((l < 0 ? -l : l) - 1), l < 0);
}

constexpr int8_t kUndef = -1;

constexpr uint32_t kNoReason = ~uint32_t{0};
constexpr uint32_t kXorFlag = 0x80000000u;

double luby(double y, int i) {
  int size, seq;
  for (size = 1, seq = 0; size < i + 1; seq++, size = 2 * size + 1) {
  }
  while (size - 1 != i) {
    size = (size - 1) >> 1;
    seq--;
    i = i % size;
  }
  return std::pow(y, seq);
}

}  // namespace

struct Solver::Impl {
  struct ClauseHdr {
    uint32_t offset;
    uint32_t size;
    float act;
    uint16_t lbd;
    bool learnt;
    bool deleted;
  };
  struct Watcher {
    uint32_t cref;
    ILit blocker;
  };
  struct XorRow {
    std::vector<uint32_t> vars;  // sorted, distinct, 0-based
    bool rhs;
    uint32_t w[2];  // watched positions into vars
  };

  // clause arena
  std::vector<uint32_t> arena;
  std::vector<ClauseHdr> db;
  std::vector<uint32_t> learnts;
  std::vector<std::vector<Watcher>> watches;  // per lit

  // xor engine
  std::vector<XorClause> xorig;           // 0-based vars, canonical
  std::vector<XorRow> xrows;              // reduced working rows
  std::vector<std::vector<uint32_t>> xwatch;  // per var -> row indices
  bool xdirty = false;

  // assignment state
  std::vector<int8_t> assigns;
  std::vector<uint8_t> phase;
  std::vector<uint32_t> vlevel;
  std::vector<uint32_t> reason;
  std::vector<ILit> trail;
  std::vector<uint32_t> trail_lim;
  uint32_t qhead = 0;

  // decision heap
  std::vector<double> activity;
  std::vector<uint32_t> heap;
  std::vector<int32_t> heap_pos;
  double var_inc = 1.0;

  bool ok = true;
  uint64_t seed = 0;
  RngStream phase_rng;
  SolverStats stats;
  int64_t max_conflicts = -1;
  double timeout_s = -1.0;
  std::chrono::steady_clock::time_point deadline;
  bool has_deadline = false;

  std::vector<uint8_t> seen;
  std::vector<ILit> tmp_reason;
  std::vector<uint8_t> model;  // snapshot of last SAT assignment, 0-based

  explicit Impl(uint64_t sd) : seed(sd), phase_rng(sd, "solver.phase", 0) {}

  uint32_t nvars() const { return static_cast<uint32_t>(assigns.size()); }
  uint32_t level() const { return static_cast<uint32_t>(trail_lim.size()); }

  int8_t lit_value(ILit l) const {
    int8_t a = assigns[ivar(l)];
    return a < 0 ? kUndef : static_cast<int8_t>(a ^ (l & 1));
  }

  uint32_t add_var() {
    uint32_t x = nvars();
    assigns.push_back(kUndef);
    phase.push_back(phase_rng.next_bit() ? 1 : 0);
    vlevel.push_back(0);
    reason.push_back(kNoReason);
    activity.push_back(0.0);
    heap_pos.push_back(-1);
    watches.emplace_back();
    watches.emplace_back();
    xwatch.emplace_back();
    seen.push_back(0);
    heap_insert(x);
    return x;
  }

  // ---- decision heap (max-heap on activity, ties by index) ----
  bool heap_lt(uint32_t a, uint32_t b) const {
    return activity[a] > activity[b] ||
           (activity[a] == activity[b] && a < b);
  }
  void heap_up(size_t i) {
    uint32_t x = heap[i];
    while (i > 0) {
      size_t p = (i - 1) >> 1;
      if (!heap_lt(x, heap[p])) break;
      heap[i] = heap[p];
      heap_pos[heap[i]] = static_cast<int32_t>(i);
      i = p;
    }
    heap[i] = x;
    heap_pos[x] = static_cast<int32_t>(i);
  }
  void heap_down(size_t i) {
    uint32_t x = heap[i];
    size_t n = heap.size();
    while (true) {
      size_t c = 2 * i + 1;
      if (c >= n) break;
      if (c + 1 < n && heap_lt(heap[c + 1], heap[c])) c++;
      if (!heap_lt(heap[c], x)) break;
      heap[i] = heap[c];
      heap_pos[heap[i]] = static_cast<int32_t>(i);
      i = c;
    }
    heap[i] = x;
    heap_pos[x] = static_cast<int32_t>(i);
  }
  void heap_insert(uint32_t x) {
    if (heap_pos[x] >= 0) return;
    heap.push_back(x);
    heap_pos[x] = static_cast<int32_t>(heap.size() - 1);
    heap_up(heap.size() - 1);
  }
  uint32_t heap_pop() {
    uint32_t x = heap[0];
    heap_pos[x] = -1;
    heap[0] = heap.back();
    heap.pop_back();
    if (!heap.empty()) {
      heap_pos[heap[0]] = 0;
      heap_down(0);
    }
    return x;
  }
  void bump(uint32_t x) {
    activity[x] += var_inc;
    if (activity[x] > 1e100) {
      for (auto& a : activity) a *= 1e-100;
      var_inc *= 1e-100;
    }
    if (heap_pos[x] >= 0) heap_up(static_cast<size_t>(heap_pos[x]));
  }

  // ---- clause management ----
  uint32_t alloc_clause(const std::vector<ILit>& lits, bool learnt) {
    ClauseHdr h;
    h.offset = static_cast<uint32_t>(arena.size());
    h.size = static_cast<uint32_t>(lits.size());
    h.act = 0;
    h.lbd = 0;
    h.learnt = learnt;
    h.deleted = false;
    arena.insert(arena.end(), lits.begin(), lits.end());
    db.push_back(h);
    return static_cast<uint32_t>(db.size() - 1);
  }
  ILit* clause_lits(uint32_t cref) { return arena.data() + db[cref].offset; }

  void attach(uint32_t cref) {
    ILit* c = clause_lits(cref);
    watches[c[0]].push_back({cref, c[1]});
    watches[c[1]].push_back({cref, c[0]});
  }

  void enqueue(ILit l, uint32_t r) {
    uint32_t x = ivar(l);
    assigns[x] = static_cast<int8_t>(1 - (l & 1));
    vlevel[x] = level();
    reason[x] = r;
    trail.push_back(l);
  }

  void backtrack(uint32_t lvl) {
    if (level() <= lvl) return;
    uint32_t bound = trail_lim[lvl];
    for (size_t i = trail.size(); i-- > bound;) {
      uint32_t x = ivar(trail[i]);
      phase[x] = static_cast<uint8_t>(assigns[x]);
      assigns[x] = kUndef;
      reason[x] = kNoReason;
      heap_insert(x);
    }
    trail.resize(bound);
    trail_lim.resize(lvl);
    if (qhead > bound) qhead = bound;
  }

  // ---- xor machinery ----
  bool row_parity(const XorRow& r) const {
    bool p = false;
    for (uint32_t v : r.vars) p ^= assigns[v] == 1;
    return p;
  }

  // Reason/conflict materializer: false literal for an assigned var.
  ILit false_lit_of(uint32_t v) const {
    return mk_ilit(v, assigns[v] == 1);
  }

  // Fills tmp_reason with a clause explaining the row, optionally putting
  // the propagated literal first.
  void materialize_row(const XorRow& r, ILit prop, std::vector<ILit>& out) {
    out.clear();
    if (prop != kLitUndef) out.push_back(prop);
    for (uint32_t v : r.vars) {
      if (prop != kLitUndef && v == ivar(prop)) continue;
      out.push_back(false_lit_of(v));
    }
  }

  void rebuild_gauss() {
    xrows.clear();
    for (auto& w : xwatch) w.clear();
    std::unordered_map<uint32_t, uint32_t> pivot_of;
    for (const XorClause& ox : xorig) {
      std::vector<uint32_t> vars(ox.vars.begin(), ox.vars.end());
      bool rhs = ox.rhs;
      while (!vars.empty()) {
        auto it = pivot_of.find(vars[0]);
        if (it == pivot_of.end()) break;
        const XorRow& p = xrows[it->second];
        // symmetric difference of two sorted var lists
        std::vector<uint32_t> merged;
        std::set_symmetric_difference(vars.begin(), vars.end(),
                                      p.vars.begin(), p.vars.end(),
                                      std::back_inserter(merged));
        vars = std::move(merged);
        rhs ^= p.rhs;
      }
      if (vars.empty()) {
        if (rhs) {
          ok = false;
          return;
        }
        continue;
      }
      if (vars.size() == 1) {
        ILit l = mk_ilit(vars[0], !rhs);
        int8_t v = lit_value(l);
        if (v == 0) {
          ok = false;
          return;
        }
        if (v == kUndef) enqueue(l, kNoReason);
        continue;
      }
      XorRow row{std::move(vars), rhs, {0, 1}};
      pivot_of[row.vars[0]] = static_cast<uint32_t>(xrows.size());
      xrows.push_back(std::move(row));
    }
    for (uint32_t i = 0; i < xrows.size(); i++) {
      xwatch[xrows[i].vars[0]].push_back(i);
      xwatch[xrows[i].vars[1]].push_back(i);
    }
    xdirty = false;
  }

  // ---- propagation ----
  // Returns a reason encoding of the conflicting constraint or kNoReason.
  uint32_t propagate() {
    while (qhead < trail.size()) {
      ILit p = trail[qhead++];
      stats.propagations++;
      // CNF clauses watching ~p
      {
        std::vector<Watcher>& ws = watches[neg(p)];
        size_t i = 0, j = 0;
        while (i < ws.size()) {
          Watcher w = ws[i];
          if (db[w.cref].deleted) {
            i++;
            continue;  // drop lazily
          }
          if (lit_value(w.blocker) == 1) {
            ws[j++] = w;
            i++;
            continue;
          }
          ILit* c = clause_lits(w.cref);
          uint32_t sz = db[w.cref].size;
          ILit false_lit = neg(p);
          if (c[0] == false_lit) std::swap(c[0], c[1]);
          // c[1] == false_lit now
          if (lit_value(c[0]) == 1) {
            ws[j++] = {w.cref, c[0]};
            i++;
            continue;
          }
          bool moved = false;
          for (uint32_t k = 2; k < sz; k++) {
            if (lit_value(c[k]) != 0) {
              std::swap(c[1], c[k]);
              watches[c[1]].push_back({w.cref, c[0]});
              moved = true;
              break;
            }
          }
          if (moved) {
            i++;
            continue;  // watch moved away from this list
          }
          // unit or conflict
          if (lit_value(c[0]) == 0) {
            // conflict: keep remaining watchers
            while (i < ws.size()) ws[j++] = ws[i++];
            ws.resize(j);
            return w.cref;
          }
          enqueue(c[0], w.cref);
          ws[j++] = w;
          i++;
        }
        ws.resize(j);
      }
      // XOR rows watching var(p)
      {
        uint32_t x = ivar(p);
        std::vector<uint32_t>& rl = xwatch[x];
        size_t i = 0, j = 0;
        while (i < rl.size()) {
          uint32_t ri = rl[i];
          XorRow& r = xrows[ri];
          int wi;
          if (r.vars[r.w[0]] == x) {
            wi = 0;
          } else if (r.vars[r.w[1]] == x) {
            wi = 1;
          } else {
            i++;
            continue;  // stale entry, drop
          }
          uint32_t other_pos = r.w[1 - wi];
          // try to move this watch to an unassigned var
          bool moved = false;
          for (uint32_t k = 0; k < r.vars.size(); k++) {
            if (k == other_pos || k == r.w[wi]) continue;
            if (assigns[r.vars[k]] == kUndef) {
              r.w[wi] = k;
              xwatch[r.vars[k]].push_back(ri);
              moved = true;
              break;
            }
          }
          if (moved) {
            i++;
            continue;  // entry dropped from this list
          }
          uint32_t other = r.vars[other_pos];
          if (assigns[other] == kUndef) {
            bool need = r.rhs;
            for (uint32_t v : r.vars) {
              if (v != other && assigns[v] == 1) need = !need;
            }
            enqueue(mk_ilit(other, !need), ri | kXorFlag);
            rl[j++] = ri;
            i++;
          } else {
            if (row_parity(r) != r.rhs) {
              while (i < rl.size()) rl[j++] = rl[i++];
              rl.resize(j);
              return ri | kXorFlag;
            }
            rl[j++] = ri;
            i++;
          }
        }
        rl.resize(j);
      }
    }
    return kNoReason;
  }

  // Literals of the reason behind an implied var / conflicting constraint.
  const std::vector<ILit>& reason_lits(uint32_t r, ILit prop) {
    if (r & kXorFlag) {
      materialize_row(xrows[r & ~kXorFlag], prop, tmp_reason);
    } else {
      ILit* c = clause_lits(r);
      tmp_reason.assign(c, c + db[r].size);
    }
    return tmp_reason;
  }

  // ---- conflict analysis (first UIP) ----
  void analyze(uint32_t confl, std::vector<ILit>& learnt, uint32_t& bt_level) {
    learnt.clear();
    learnt.push_back(kLitUndef);  // slot for the asserting literal
    int path = 0;
    ILit p = kLitUndef;
    size_t index = trail.size();
    std::vector<uint32_t> to_clear;
    do {
      const std::vector<ILit> rl = reason_lits(confl, p);
      for (size_t k = (p == kLitUndef ? 0 : 1); k < rl.size(); k++) {
        ILit q = rl[k];
        uint32_t v = ivar(q);
        if (seen[v] || vlevel[v] == 0) continue;
        seen[v] = 1;
        to_clear.push_back(v);
        bump(v);
        if (vlevel[v] >= level()) {
          path++;
        } else {
          learnt.push_back(q);
        }
      }
      while (!seen[ivar(trail[--index])]) {
      }
      p = trail[index];
      confl = reason[ivar(p)];
      seen[ivar(p)] = 0;
      path--;
    } while (path > 0);
    learnt[0] = neg(p);

    // cheap minimization: drop lits whose reason is fully subsumed
    size_t j = 1;
    for (size_t i = 1; i < learnt.size(); i++) {
      uint32_t v = ivar(learnt[i]);
      uint32_t r = reason[v];
      bool redundant = false;
      if (r != kNoReason) {
        redundant = true;
        const std::vector<ILit> rl = reason_lits(r, kLitUndef);
        for (ILit q : rl) {
          uint32_t qv = ivar(q);
          if (qv == v || vlevel[qv] == 0) continue;
          if (!seen[qv]) {
            redundant = false;
            break;
          }
        }
      }
      if (!redundant) learnt[j++] = learnt[i];
    }
    learnt.resize(j);

    bt_level = 0;
    if (learnt.size() > 1) {
      size_t max_i = 1;
      for (size_t i = 2; i < learnt.size(); i++) {
        if (vlevel[ivar(learnt[i])] > vlevel[ivar(learnt[max_i])]) max_i = i;
      }
      std::swap(learnt[1], learnt[max_i]);
      bt_level = vlevel[ivar(learnt[1])];
    }
    for (uint32_t v : to_clear) seen[v] = 0;
  }

  uint16_t compute_lbd(const std::vector<ILit>& c) {
    std::vector<uint32_t> lvls;
    for (ILit l : c) lvls.push_back(vlevel[ivar(l)]);
    std::sort(lvls.begin(), lvls.end());
    lvls.erase(std::unique(lvls.begin(), lvls.end()), lvls.end());
    return static_cast<uint16_t>(std::min<size_t>(lvls.size(), 65535));
  }

  void reduce_db() {
    std::vector<uint32_t> cands;
    for (uint32_t cr : learnts) {
      if (db[cr].deleted) continue;
      ILit* c = clause_lits(cr);
      bool locked = reason[ivar(c[0])] == cr && lit_value(c[0]) == 1;
      if (!locked && db[cr].lbd > 2 && db[cr].size > 2) cands.push_back(cr);
    }
    std::sort(cands.begin(), cands.end(), [&](uint32_t a, uint32_t b) {
      if (db[a].lbd != db[b].lbd) return db[a].lbd > db[b].lbd;
      if (db[a].act != db[b].act) return db[a].act < db[b].act;
      return a < b;
    });
    for (size_t i = 0; i < cands.size() / 2; i++) db[cands[i]].deleted = true;
    learnts.erase(std::remove_if(learnts.begin(), learnts.end(),
                                 [&](uint32_t cr) { return db[cr].deleted; }),
                  learnts.end());
  }

  // ---- toplevel ----
  bool deadline_hit() const {
    return has_deadline && std::chrono::steady_clock::now() >= deadline;
  }

  SolveStatus search(const std::vector<ILit>& assumptions) {
    int64_t conflicts_left = max_conflicts;
    int restarts = 0;
    uint64_t restart_budget =
        static_cast<uint64_t>(luby(2.0, restarts) * 100.0);
    uint64_t conflicts_this_restart = 0;
    uint64_t since_deadline_check = 0;

    while (true) {
      uint32_t confl = propagate();
      if (confl != kNoReason) {
        stats.conflicts++;
        conflicts_this_restart++;
        if (level() == 0) {
          ok = false;
          return SolveStatus::kUnsat;
        }
        std::vector<ILit> learnt;
        uint32_t bt;
        analyze(confl, learnt, bt);
        backtrack(bt);
        if (learnt.size() == 1) {
          enqueue(learnt[0], kNoReason);
        } else {
          uint32_t cr = alloc_clause(learnt, true);
          db[cr].lbd = compute_lbd(learnt);
          learnts.push_back(cr);
          attach(cr);
          enqueue(learnt[0], cr);
        }
        var_inc /= 0.95;
        if (conflicts_left > 0 && --conflicts_left == 0) {
          backtrack(0);
          return SolveStatus::kUnknown;
        }
        if (++since_deadline_check >= 256) {
          since_deadline_check = 0;
          if (deadline_hit()) {
            backtrack(0);
            return SolveStatus::kUnknown;
          }
        }
        continue;
      }
      if (conflicts_this_restart >= restart_budget) {
        conflicts_this_restart = 0;
        restart_budget =
            static_cast<uint64_t>(luby(2.0, ++restarts) * 100.0);
        backtrack(0);
        continue;
      }
      if (learnts.size() > 20000 + 4 * static_cast<size_t>(nvars())) {
        reduce_db();
      }
      // place pending assumptions, then decide
      if (level() < assumptions.size()) {
        ILit a = assumptions[level()];
        int8_t v = lit_value(a);
        if (v == 0) return SolveStatus::kUnsat;
        trail_lim.push_back(static_cast<uint32_t>(trail.size()));
        if (v == kUndef) enqueue(a, kNoReason);
        continue;
      }
      if (trail.size() == nvars()) return SolveStatus::kSat;
      uint32_t x;
      while (true) {
        if (heap.empty()) return SolveStatus::kSat;  // defensive
        x = heap_pop();
        if (assigns[x] == kUndef) break;
      }
      stats.decisions++;
      trail_lim.push_back(static_cast<uint32_t>(trail.size()));
      enqueue(mk_ilit(x, phase[x] == 0), kNoReason);
    }
  }

  SolveStatus solve(const std::vector<Lit>& ext_assumptions) {
    if (!ok) return SolveStatus::kUnsat;
    backtrack(0);
    if (xdirty) {
      rebuild_gauss();
      if (!ok) return SolveStatus::kUnsat;
    }
    std::vector<ILit> assumptions;
    assumptions.reserve(ext_assumptions.size());
    for (Lit l : ext_assumptions) {
      uint32_t v = static_cast<uint32_t>(l < 0 ? -l : l);
      if (v == 0 || v > nvars()) {
        throw SolverError("assumption literal " + std::to_string(l) +
                          " out of range");
      }
      assumptions.push_back(from_dimacs(l));
    }
    if (timeout_s >= 0) {
      deadline = std::chrono::steady_clock::now() +
                 std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                     std::chrono::duration<double>(timeout_s));
      has_deadline = true;
    } else {
      has_deadline = false;
    }
    qhead = 0;  // replay level-0 trail so fresh clauses/rows propagate
    SolveStatus st = search(assumptions);
    if (st == SolveStatus::kSat) {
      verify_model();
      model.assign(assigns.begin(), assigns.end());
    }
    backtrack(0);
    return st;
  }

  void verify_model() {
    for (const ClauseHdr& h : db) {
      if (h.deleted || h.learnt) continue;
      bool sat = false;
      for (uint32_t k = 0; k < h.size; k++) {
        if (lit_value(arena[h.offset + k]) == 1) {
          sat = true;
          break;
        }
      }
      if (!sat) throw SolverError("model verification failed on a clause");
    }
    for (const XorClause& x : xorig) {
      bool p = false;
      for (uint32_t v : x.vars) p ^= assigns[v] == 1;
      if (p != x.rhs) throw SolverError("model verification failed on an xor");
    }
  }
};

Solver::Solver(uint64_t seed) : impl_(std::make_unique<Impl>(seed)) {}
Solver::~Solver() = default;

Var Solver::new_var() { return impl_->add_var() + 1; }
Var Solver::num_vars() const { return impl_->nvars(); }

void Solver::load(const CnfFormula& f) {
  while (impl_->nvars() < f.num_vars) impl_->add_var();
  for (const Clause& c : f.clauses) add_clause(c);
  for (const XorClause& x : f.xors) add_xor(x);
}

void Solver::add_clause(const Clause& c) {
  Impl& s = *impl_;
  if (!s.ok) return;
  std::vector<ILit> lits;
  lits.reserve(c.size());
  for (Lit l : c) {
    uint32_t v = static_cast<uint32_t>(l < 0 ? -l : l);
    if (v == 0 || v > s.nvars()) {
      throw SolverError("literal " + std::to_string(l) + " out of range");
    }
    lits.push_back(from_dimacs(l));
  }
  std::sort(lits.begin(), lits.end());
  lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
  for (size_t i = 0; i + 1 < lits.size(); i++) {
    if (lits[i] == neg(lits[i + 1])) return;  // tautology
  }
  // called at decision level 0 only
  if (lits.empty()) {
    s.ok = false;
    return;
  }
  if (lits.size() == 1) {
    int8_t v = s.lit_value(lits[0]);
    if (v == 0) {
      s.ok = false;
    } else if (v == kUndef) {
      s.enqueue(lits[0], kNoReason);
    }
    return;
  }
  // watch preferably unassigned or true literals
  auto rank = [&](ILit l) {
    int8_t v = s.lit_value(l);
    return v == kUndef ? 0 : (v == 1 ? 1 : 2);
  };
  std::stable_sort(lits.begin(), lits.end(),
                   [&](ILit a, ILit b) { return rank(a) < rank(b); });
  uint32_t cr = s.alloc_clause(lits, false);
  s.attach(cr);
}

void Solver::add_xor(const XorClause& x) {
  Impl& s = *impl_;
  if (!s.ok) return;
  XorClause ix;
  ix.rhs = x.rhs;
  for (Var v : x.vars) {
    if (v == 0 || v > s.nvars()) {
      throw SolverError("xor variable " + std::to_string(v) + " out of range");
    }
    ix.vars.push_back(v - 1);
  }
  if (ix.vars.empty()) {
    if (ix.rhs) s.ok = false;
    return;
  }
  if (ix.vars.size() == 1) {
    ILit l = mk_ilit(ix.vars[0], !ix.rhs);
    int8_t val = s.lit_value(l);
    if (val == 0) {
      s.ok = false;
    } else if (val == kUndef) {
      s.enqueue(l, kNoReason);
    }
    return;
  }
  s.xorig.push_back(std::move(ix));
  s.xdirty = true;
}

void Solver::set_budget(int64_t max_conflicts, double timeout_s) {
  impl_->max_conflicts = max_conflicts;
  impl_->timeout_s = timeout_s;
}

SolveStatus Solver::solve(const std::vector<Lit>& assumptions) {
  return impl_->solve(assumptions);
}

bool Solver::model_value(Var v) const {
  if (v == 0 || v > impl_->model.size()) {
    throw SolverError("model_value: variable out of range");
  }
  return impl_->model[v - 1] == 1;
}

std::vector<uint8_t> Solver::model() const {
  std::vector<uint8_t> m(impl_->nvars() + 1, 0);
  for (Var v = 1; v <= impl_->model.size(); v++) {
    m[v] = impl_->model[v - 1] == 1 ? 1 : 0;
  }
  return m;
}

const SolverStats& Solver::stats() const { return impl_->stats; }

}  // namespace mcfil
