#include "mcfil/functionality.hpp"

#include <algorithm>

#include "mcfil/errors.hpp"
#include "mcfil/rng.hpp"

namespace mcfil {

namespace {

uint32_t log2_exact(uint64_t v) {
  if (v == 0 || (v & (v - 1)) != 0) {
    throw ConfigError("bucket_size " + std::to_string(v) +
                      " is not a power of two");
  }
  uint32_t k = 0;
  while ((v >> k) != 1) k++;
  return k;
}

uint32_t bits_for(uint64_t max_value) {
  uint32_t w = 1;
  while ((max_value >> w) != 0) w++;
  return w;
}

BitVec mean_of(const BitVec& c, const BitVec& t) {
  uint32_t w = c.width();
  BitVec s = c.zext(w + 1).add(t.zext(w + 1));
  return s.extract(w, 1);
}

}  // namespace

Functionality and_gate() {
  Functionality f;
  f.name = "and_gate";
  f.chosen_width = f.target_width = f.output_width = 1;
  f.build = [] {
    CircuitBuilder b;
    b.set_output(b.band(b.chosen(1), b.target(1)));
    return b.build();
  };
  f.eval = [](const BitVec& c, const BitVec& t) { return c.band(t); };
  return f;
}

Functionality millionaires(uint32_t width) {
  if (width < 1) throw ConfigError("millionaires: width must be >= 1");
  Functionality f;
  f.name = "millionaires";
  f.chosen_width = f.target_width = width;
  f.output_width = 1;
  f.params["width"] = width;
  f.build = [width] {
    CircuitBuilder b;
    b.set_output(b.ugt(b.chosen(width), b.target(width)));
    return b.build();
  };
  f.eval = [](const BitVec& c, const BitVec& t) {
    return BitVec(1, c.ugt(t) ? 1 : 0);
  };
  return f;
}

Functionality dual_execution_affine(uint32_t dim) {
  if (dim < 2) throw ConfigError("dual_execution_affine: dim must be >= 2");
  Functionality f;
  f.name = "dual_execution_affine";
  f.chosen_width = dim * dim + dim;
  f.target_width = dim;
  f.output_width = 1;
  f.params["dim"] = dim;
  f.build = [dim] {
    CircuitBuilder b;
    NodeRef ch = b.chosen(dim * dim + dim);
    NodeRef tg = b.target(dim);
    std::vector<NodeRef> row_eq;
    for (uint32_t r = 0; r < dim; r++) {
      std::vector<NodeRef> prod_c, prod_t;
      for (uint32_t j = 0; j < dim; j++) {
        uint32_t mbit = dim + r * dim + j;
        NodeRef m = b.extract(ch, mbit, mbit);
        prod_c.push_back(b.band(m, b.extract(ch, j, j)));
        prod_t.push_back(b.band(m, b.extract(tg, j, j)));
      }
      NodeRef rc = b.nary(Op::kXor, prod_c);
      NodeRef rt = b.nary(Op::kXor, prod_t);
      row_eq.push_back(b.eq(rc, rt));
    }
    b.set_output(b.nary(Op::kAnd, row_eq));
    return b.build();
  };
  f.eval = [dim](const BitVec& c, const BitVec& t) {
    for (uint32_t r = 0; r < dim; r++) {
      bool rc = false, rt = false;
      for (uint32_t j = 0; j < dim; j++) {
        bool m = c.bit(dim + r * dim + j);
        rc ^= m && c.bit(j);
        rt ^= m && t.bit(j);
      }
      if (rc != rt) return BitVec(1, 0);
    }
    return BitVec(1, 1);
  };
  return f;
}

Functionality mean_average(uint32_t width) {
  if (width < 2) throw ConfigError("mean_average: width must be >= 2");
  Functionality f;
  f.name = "mean_average";
  f.chosen_width = f.target_width = f.output_width = width;
  f.params["width"] = width;
  f.build = [width] {
    CircuitBuilder b;
    NodeRef s = b.add(b.zext(b.chosen(width), width + 1),
                      b.zext(b.target(width), width + 1));
    b.set_output(b.extract(s, width, 1));
    return b.build();
  };
  f.eval = [](const BitVec& c, const BitVec& t) { return mean_of(c, t); };
  return f;
}

Functionality bucketed_mean(uint32_t width, uint64_t bucket_size) {
  uint32_t logb = log2_exact(bucket_size);
  if (width < 2) throw ConfigError("bucketed_mean: width must be >= 2");
  if (logb >= width) {
    throw ConfigError("bucketed_mean: bucket_size must be < 2^width");
  }
  Functionality f;
  f.name = "bucketed_mean";
  f.chosen_width = f.target_width = width;
  f.output_width = width - logb;
  f.params["width"] = width;
  f.params["bucket"] = bucket_size;
  f.build = [width, logb] {
    CircuitBuilder b;
    NodeRef ch = b.chosen(width);
    NodeRef tg = b.target(width);
    if (logb > 0) {
      tg = b.concat(b.extract(tg, width - 1, logb), b.constant(logb, 0));
    }
    NodeRef s = b.add(b.zext(ch, width + 1), b.zext(tg, width + 1));
    NodeRef m = b.extract(s, width, 1);
    NodeRef d = b.ite(b.ult(ch, m), b.sub(m, ch), b.sub(ch, m));
    b.set_output(b.extract(d, width - 1, logb));
    return b.build();
  };
  f.eval = [width, logb](const BitVec& c, const BitVec& t) {
    BitVec tq = logb > 0
                    ? t.extract(width - 1, logb).concat(BitVec(logb, 0))
                    : t;
    BitVec m = mean_of(c, tq);
    BitVec d = c.ult(m) ? m.sub(c) : c.sub(m);
    return d.extract(width - 1, logb);
  };
  return f;
}

Functionality wage(uint32_t width, WageVariant variant) {
  if (width < 4) throw ConfigError("wage: width must be >= 4");
  Functionality f;
  f.name = variant == WageVariant::kStandardDiv ? "wage_standard"
                                                : "wage_circuit";
  f.chosen_width = f.target_width = width;
  f.output_width = 1;
  f.params["width"] = width;
  f.params["variant"] = variant == WageVariant::kCircuitDiv ? 1 : 0;
  f.build = [width, variant] {
    CircuitBuilder b;
    NodeRef ch = b.chosen(width);
    NodeRef tg = b.target(width);
    NodeRef cw = b.zext(ch, width + 1);
    NodeRef s = b.add(cw, b.zext(tg, width + 1));
    if (variant == WageVariant::kStandardDiv) {
      NodeRef m = b.udiv(s, b.constant(width + 1, 2));
      b.set_output(b.ult(cw, m));
    } else {
      NodeRef twice = b.add(cw, cw);
      b.set_output(b.ult(twice, s));
    }
    return b.build();
  };
  f.eval = [width, variant](const BitVec& c, const BitVec& t) {
    BitVec cw = c.zext(width + 1);
    BitVec s = cw.add(t.zext(width + 1));
    if (variant == WageVariant::kStandardDiv) {
      return BitVec(1, cw.ult(s.udiv(BitVec(width + 1, 2))) ? 1 : 0);
    }
    return BitVec(1, cw.add(cw).ult(s) ? 1 : 0);
  };
  return f;
}

Functionality sugar_beets(uint32_t num_prices, uint32_t unit_bits,
                          uint32_t honest_buyers, uint32_t honest_sellers,
                          uint32_t adv_buyers, uint32_t adv_sellers) {
  if (num_prices < 2) throw ConfigError("sugar_beets: num_prices must be >= 2");
  if (unit_bits < 1) throw ConfigError("sugar_beets: unit_bits must be >= 1");
  if (honest_buyers + honest_sellers == 0) {
    throw ConfigError("sugar_beets: need at least one honest party");
  }
  if (adv_buyers + adv_sellers == 0) {
    throw ConfigError("sugar_beets: need at least one adversary party");
  }
  const uint32_t P = num_prices, U = unit_bits;
  const uint32_t sched = P * U;
  const uint32_t buyers = honest_buyers + adv_buyers;
  const uint32_t sellers = honest_sellers + adv_sellers;
  const uint64_t unit_max = (uint64_t{1} << U) - 1;
  const uint32_t sum_w =
      bits_for(static_cast<uint64_t>(std::max(buyers, sellers)) * P * unit_max);
  const uint32_t out_w = bits_for(P - 1);

  Functionality f;
  f.name = "sugar_beets";
  f.chosen_width = (adv_buyers + adv_sellers) * sched;
  f.target_width = (honest_buyers + honest_sellers) * sched;
  f.output_width = out_w;
  f.params = {{"prices", P},
              {"unit_bits", U},
              {"honest_buyers", honest_buyers},
              {"honest_sellers", honest_sellers},
              {"adv_buyers", adv_buyers},
              {"adv_sellers", adv_sellers}};

  const uint32_t cw = f.chosen_width;
  const uint32_t tw = f.target_width;

  // Schedule layout: party schedules are concatenated buyers-first within
  // each input; price p's unit field occupies bits [p*U, (p+1)*U).
  f.build = [=] {
    CircuitBuilder b;
    NodeRef ch = b.chosen(cw);
    NodeRef tg = b.target(tw);
    auto field = [&](NodeRef root, uint32_t party, uint32_t p) {
      uint32_t base = party * sched + p * U;
      return b.zext(b.extract(root, base + U - 1, base), sum_w);
    };
    // buyer schedules: honest buyers, then adversary buyers
    std::vector<std::vector<NodeRef>> buyer_units, seller_units;
    for (uint32_t i = 0; i < honest_buyers; i++) {
      std::vector<NodeRef> u;
      for (uint32_t p = 0; p < P; p++) u.push_back(field(tg, i, p));
      buyer_units.push_back(u);
    }
    for (uint32_t i = 0; i < adv_buyers; i++) {
      std::vector<NodeRef> u;
      for (uint32_t p = 0; p < P; p++) u.push_back(field(ch, i, p));
      buyer_units.push_back(u);
    }
    for (uint32_t i = 0; i < honest_sellers; i++) {
      std::vector<NodeRef> u;
      for (uint32_t p = 0; p < P; p++)
        u.push_back(field(tg, honest_buyers + i, p));
      seller_units.push_back(u);
    }
    for (uint32_t i = 0; i < adv_sellers; i++) {
      std::vector<NodeRef> u;
      for (uint32_t p = 0; p < P; p++)
        u.push_back(field(ch, adv_buyers + i, p));
      seller_units.push_back(u);
    }
    auto sum_range = [&](const std::vector<std::vector<NodeRef>>& parties,
                         uint32_t lo, uint32_t hi) {
      NodeRef acc = b.constant(sum_w, 0);
      for (const auto& u : parties) {
        for (uint32_t p = lo; p <= hi; p++) acc = b.add(acc, u[p]);
      }
      return acc;
    };
    NodeRef out = b.constant(out_w, 0);
    for (uint32_t p = 0; p < P; p++) {
      NodeRef demand = sum_range(buyer_units, p, P - 1);
      NodeRef supply = sum_range(seller_units, 0, p);
      NodeRef ge = b.bnot(b.ult(demand, supply));
      out = b.ite(ge, b.constant(out_w, p), out);
    }
    b.set_output(out);
    return b.build();
  };

  f.eval = [=](const BitVec& c, const BitVec& t) {
    auto units = [&](const BitVec& v, uint32_t party, uint32_t p) {
      return v.extract(party * sched + p * U + U - 1, party * sched + p * U)
          .to_u64();
    };
    auto demand = [&](uint32_t p) {
      uint64_t d = 0;
      for (uint32_t pp = p; pp < P; pp++) {
        for (uint32_t i = 0; i < honest_buyers; i++) d += units(t, i, pp);
        for (uint32_t i = 0; i < adv_buyers; i++) d += units(c, i, pp);
      }
      return d;
    };
    auto supply = [&](uint32_t p) {
      uint64_t s = 0;
      for (uint32_t pp = 0; pp <= p; pp++) {
        for (uint32_t i = 0; i < honest_sellers; i++)
          s += units(t, honest_buyers + i, pp);
        for (uint32_t i = 0; i < adv_sellers; i++)
          s += units(c, adv_buyers + i, pp);
      }
      return s;
    };
    uint64_t mcp = 0;
    for (uint32_t p = 0; p < P; p++) {
      if (demand(p) >= supply(p)) mcp = p;
    }
    return BitVec(out_w, mcp);
  };
  return f;
}

void validate_agreement(const Functionality& f, uint64_t seed) {
  Circuit c = f.build();
  if (c.chosen_width() != f.chosen_width ||
      c.target_width() != f.target_width ||
      c.output_width() != f.output_width) {
    throw CircuitError(f.name + ": declared widths disagree with the circuit");
  }
  auto check = [&](const BitVec& cv, const BitVec& tv) {
    BitVec sym = evaluate(c, cv, tv);
    BitVec con = f.eval(cv, tv);
    if (!(sym == con)) {
      throw CircuitError(f.name + ": symbolic " + sym.to_hex() +
                         " != concrete " + con.to_hex() + " at chosen=" +
                         cv.to_hex() + " target=" + tv.to_hex());
    }
  };
  uint32_t total = f.chosen_width + f.target_width;
  if (total <= 16) {
    for (uint64_t cv = 0; cv < (uint64_t{1} << f.chosen_width); cv++) {
      for (uint64_t tv = 0; tv < (uint64_t{1} << f.target_width); tv++) {
        check(BitVec(f.chosen_width, cv), BitVec(f.target_width, tv));
      }
    }
    return;
  }
  RngStream rng(seed, "validate." + f.name, 0);
  auto random_bits = [&](uint32_t w) {
    BitVec v(w);
    for (uint32_t i = 0; i < w; i++) v.set_bit(i, rng.next_bit());
    return v;
  };
  for (int i = 0; i < 10000; i++) {
    check(random_bits(f.chosen_width), random_bits(f.target_width));
  }
}

namespace {

uint64_t param_or(const std::map<std::string, uint64_t>& params,
                  const std::string& key, uint64_t fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

uint64_t param_req(const std::map<std::string, uint64_t>& params,
                   const std::string& key, const std::string& func) {
  auto it = params.find(key);
  if (it == params.end()) {
    throw ConfigError(func + " requires parameter '" + key + "'");
  }
  return it->second;
}

std::map<std::string, Functionality>& user_registry() {
  static std::map<std::string, Functionality> reg;
  return reg;
}

}  // namespace

Functionality make_functionality(
    const std::string& name, const std::map<std::string, uint64_t>& params) {
  if (name == "and_gate") return and_gate();
  if (name == "millionaires") {
    return millionaires(
        static_cast<uint32_t>(param_req(params, "width", name)));
  }
  if (name == "mean_average") {
    return mean_average(
        static_cast<uint32_t>(param_req(params, "width", name)));
  }
  if (name == "bucketed_mean") {
    return bucketed_mean(static_cast<uint32_t>(param_req(params, "width", name)),
                         param_or(params, "bucket", 16));
  }
  if (name == "wage") {
    return wage(static_cast<uint32_t>(param_req(params, "width", name)),
                param_or(params, "variant", 0) == 0
                    ? WageVariant::kStandardDiv
                    : WageVariant::kCircuitDiv);
  }
  if (name == "dual_execution_affine") {
    uint64_t dim = param_or(params, "dim", param_or(params, "width", 0));
    if (dim == 0) throw ConfigError(name + " requires parameter 'dim'");
    return dual_execution_affine(static_cast<uint32_t>(dim));
  }
  if (name == "sugar_beets") {
    return sugar_beets(
        static_cast<uint32_t>(param_req(params, "prices", name)),
        static_cast<uint32_t>(param_or(params, "unit_bits", 1)),
        static_cast<uint32_t>(param_or(params, "honest_buyers", 1)),
        static_cast<uint32_t>(param_or(params, "honest_sellers", 1)),
        static_cast<uint32_t>(param_or(params, "adv_buyers", 1)),
        static_cast<uint32_t>(param_or(params, "adv_sellers", 0)));
  }
  auto it = user_registry().find(name);
  if (it != user_registry().end()) return it->second;
  throw ConfigError("unknown functionality '" + name + "'");
}

void register_functionality(const Functionality& f) {
  for (const std::string& builtin : functionality_names()) {
    if (f.name == builtin && user_registry().count(f.name) == 0) {
      throw ConfigError("cannot shadow builtin functionality '" + f.name +
                        "'");
    }
  }
  validate_agreement(f);
  user_registry()[f.name] = f;
}

std::vector<std::string> functionality_names() {
  std::vector<std::string> names = {
      "and_gate",     "millionaires",          "mean_average", "bucketed_mean",
      "wage",         "dual_execution_affine", "sugar_beets"};
  for (const auto& [name, fn] : user_registry()) names.push_back(name);
  return names;
}

}  // namespace mcfil
