#include "mcfil/counting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "mcfil/errors.hpp"

namespace mcfil {

uint64_t CountEstimate::rounded() const {
  if (count >= 18446744073709551615.0L) return UINT64_MAX;
  return static_cast<uint64_t>(count + 0.5L);
}

std::string CountEstimate::str() const {
  if (unknown) return "unknown";
  if (count < 9223372036854775808.0L) {
    return std::to_string(static_cast<uint64_t>(count + 0.5L));
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "2^%.2f",
                static_cast<double>(std::log2(count)));
  return buf;
}

uint32_t pivot_for(double epsilon) {
  if (epsilon <= 0) throw ConfigError("epsilon must be positive");
  double v = 9.84 * (1.0 + epsilon / (1.0 + epsilon)) *
             (1.0 + 1.0 / epsilon) * (1.0 + 1.0 / epsilon);
  return 1 + static_cast<uint32_t>(std::ceil(v));
}

uint32_t rounds_for(double delta) {
  if (delta <= 0 || delta >= 1) throw ConfigError("delta must be in (0, 1)");
  uint32_t r = static_cast<uint32_t>(std::ceil(3.0 * std::log(1.0 / delta)));
  if (r < 1) r = 1;
  if (r % 2 == 0) r++;
  return r;
}

HashConstraint sample_hash(const std::vector<Var>& projection,
                           RngStream& rng) {
  if (projection.empty()) {
    throw ConfigError("sample_hash needs a nonempty projection");
  }
  HashConstraint h;
  for (Var v : projection) {
    if (rng.next_bit()) h.vars.push_back(v);
  }
  h.rhs = rng.next_bit();
  return h;
}

namespace {

void check_projection(const CnfFormula& f, const std::vector<Var>& projection) {
  for (Var v : projection) {
    if (v == 0 || v > f.num_vars) {
      throw ConfigError("projection variable " + std::to_string(v) +
                        " out of range");
    }
  }
}

CountEstimate sat_indicator(const CnfFormula& f, const CountConfig& cfg) {
  CountEstimate e;
  e.exact = true;
  SolveResult r = solve(f, {}, cfg.solver);
  if (r.status == SolveStatus::kUnknown) {
    e.unknown = true;
    e.exact = false;
    return e;
  }
  e.count = r.status == SolveStatus::kSat ? 1.0L : 0.0L;
  return e;
}

void apply_hashes(CnfFormula& f, const std::vector<HashConstraint>& hs,
                  uint32_t k) {
  for (uint32_t i = 0; i < k; i++) {
    std::vector<Lit> lits;
    lits.reserve(hs[i].vars.size());
    for (Var v : hs[i].vars) lits.push_back(static_cast<Lit>(v));
    f.add_xor(lits, hs[i].rhs);
  }
}

// Projected count of f plus the first k hashes, capped at limit.
// Returns limit+1 as "more than limit"; ~0 on budget exhaustion.
uint64_t cell_count(const CnfFormula& f, const std::vector<Var>& projection,
                    const std::vector<HashConstraint>& hs, uint32_t k,
                    uint64_t limit, const CountConfig& cfg) {
  CnfFormula cell = f;
  apply_hashes(cell, hs, k);
  EnumerationResult e = enumerate_models(cell, projection, limit, cfg.solver);
  if (e.budget_exhausted) return ~uint64_t{0};
  if (!e.complete) return limit + 1;
  return e.models.size();
}

}  // namespace

CountEstimate count_exact(const CnfFormula& f,
                          const std::vector<Var>& projection,
                          const CountConfig& cfg) {
  check_projection(f, projection);
  if (projection.size() > 24) {
    throw ConfigError("count_exact projection of " +
                      std::to_string(projection.size()) +
                      " variables exceeds the 24-variable guard");
  }
  if (projection.empty()) return sat_indicator(f, cfg);
  uint64_t limit = uint64_t{1} << projection.size();
  EnumerationResult e = enumerate_models(f, projection, limit, cfg.solver);
  CountEstimate out;
  if (e.budget_exhausted) {
    out.unknown = true;
    return out;
  }
  out.count = static_cast<long double>(e.models.size());
  out.exact = true;
  return out;
}

CountEstimate count_approx(const CnfFormula& f,
                           const std::vector<Var>& projection, double epsilon,
                           double delta, const CountConfig& cfg) {
  check_projection(f, projection);
  uint32_t pivot = pivot_for(epsilon);
  uint32_t rounds = rounds_for(delta);
  if (projection.empty()) return sat_indicator(f, cfg);

  CountEstimate out;
  out.epsilon = epsilon;
  out.delta = delta;

  // Small solution sets are counted outright.
  EnumerationResult base = enumerate_models(f, projection, pivot, cfg.solver);
  if (base.budget_exhausted) {
    out.unknown = true;
    return out;
  }
  if (base.complete) {
    out.count = static_cast<long double>(base.models.size());
    out.exact = true;
    out.epsilon = 0.0;
    out.delta = 0.0;
    return out;
  }

  uint32_t maxk = static_cast<uint32_t>(projection.size());
  long double cap = std::ldexp(1.0L, static_cast<int>(maxk));
  std::vector<long double> estimates;
  uint32_t prev_k = 1;
  bool budget_hit = false;

  for (uint32_t round = 0; round < rounds; round++) {
    RngStream rng(cfg.seed, cfg.purpose + ".hash",
                  cfg.call_index * 4096 + round);
    std::vector<HashConstraint> hs;
    hs.reserve(maxk);
    for (uint32_t i = 0; i < maxk; i++) {
      hs.push_back(sample_hash(projection, rng));
    }
    // Counts are non-increasing in k for a prefix family; find the smallest
    // k whose cell fits under the pivot, galloping out from the previous
    // round's answer before bisecting.
    auto fits = [&](uint32_t k, uint64_t& n) {
      n = cell_count(f, projection, hs, k, pivot, cfg);
      if (n == ~uint64_t{0}) {
        budget_hit = true;
        return false;
      }
      return n <= pivot;
    };
    uint32_t lo = 0, hi = maxk;  // count(lo) > pivot, count(hi) <= pivot
    uint64_t n_hi = 0;
    uint64_t n = 0;
    uint32_t k = std::min(std::max(prev_k, 1u), maxk);
    if (fits(k, n)) {
      hi = k;
      n_hi = n;
      uint32_t step = 1;
      while (hi > lo + 1) {
        uint32_t probe = hi > step ? hi - step : 0;
        if (probe <= lo) probe = lo + 1;
        if (budget_hit) break;
        if (fits(probe, n)) {
          hi = probe;
          n_hi = n;
          step *= 2;
        } else {
          lo = probe;
          break;
        }
      }
    } else if (!budget_hit) {
      lo = k;
      uint32_t step = 1;
      bool found = false;
      while (lo + step < maxk) {
        if (fits(lo + step, n)) {
          hi = lo + step;
          n_hi = n;
          found = true;
          break;
        }
        if (budget_hit) break;
        lo = lo + step;
        step *= 2;
      }
      if (!found && !budget_hit) {
        if (fits(maxk, n)) {
          hi = maxk;
          n_hi = n;
        } else {
          // even 2^maxk cells stay above the pivot: statistically implausible
          // unless the budget interfered; treat the round as failed
          continue;
        }
      }
    }
    if (budget_hit) break;
    while (hi > lo + 1) {
      uint32_t mid = lo + (hi - lo) / 2;
      if (fits(mid, n)) {
        hi = mid;
        n_hi = n;
      } else {
        lo = mid;
      }
      if (budget_hit) break;
    }
    if (budget_hit) break;
    prev_k = hi;
    if (n_hi == 0) continue;  // cell collapsed past the boundary; round void
    long double est = std::ldexp(static_cast<long double>(n_hi),
                                 static_cast<int>(hi));
    estimates.push_back(std::min(est, cap));
  }

  if (budget_hit || estimates.empty()) {
    out.unknown = true;
    return out;
  }
  std::sort(estimates.begin(), estimates.end());
  out.count = estimates[estimates.size() / 2];
  return out;
}

}  // namespace mcfil
