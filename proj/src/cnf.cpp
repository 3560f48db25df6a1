#include "mcfil/cnf.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "mcfil/errors.hpp"

namespace mcfil {

// Bit literals used during compilation: a formula literal, or one of two
// sentinels for constant true/false. Negation is unary minus for all three.
namespace {

constexpr Lit kTrueLit = INT32_MAX;
constexpr Lit kFalseLit = -INT32_MAX;

inline bool lit_is_const(Lit l) { return l == kTrueLit || l == kFalseLit; }
inline Lit const_lit(bool v) { return v ? kTrueLit : kFalseLit; }

}  // namespace

XorClause XorClause::from_lits(std::vector<Lit> lits, bool rhs) {
  std::vector<Var> vars;
  vars.reserve(lits.size());
  for (Lit l : lits) {
    if (l < 0) {
      rhs = !rhs;
      l = -l;
    }
    vars.push_back(static_cast<Var>(l));
  }
  std::sort(vars.begin(), vars.end());
  XorClause x;
  x.rhs = rhs;
  for (size_t i = 0; i < vars.size();) {
    size_t j = i;
    while (j < vars.size() && vars[j] == vars[i]) j++;
    if ((j - i) % 2 == 1) x.vars.push_back(vars[i]);
    i = j;
  }
  return x;
}

void CnfFormula::add_clause(Clause c) { clauses.push_back(std::move(c)); }

void CnfFormula::add_xor(std::vector<Lit> lits, bool rhs) {
  add_xor_clause(XorClause::from_lits(std::move(lits), rhs));
}

void CnfFormula::add_xor_clause(const XorClause& x) {
  if (x.vars.empty()) {
    if (x.rhs) clauses.push_back({});  // contradiction
    return;                            // tautology otherwise
  }
  if (x.vars.size() == 1) {
    Lit v = static_cast<Lit>(x.vars[0]);
    clauses.push_back({x.rhs ? v : -v});
    return;
  }
  xors.push_back(x);
}

InputBits InputBits::vars(std::vector<Var> v) {
  InputBits b;
  b.vars_ = std::move(v);
  return b;
}

InputBits InputBits::constant(const BitVec& v) {
  InputBits b;
  b.const_ = v;
  return b;
}

namespace {

// Gate constructors with constant folding. Every fresh variable is defined by
// a full biconditional, which keeps model counts projected on inputs exact.
class ConeCompiler {
 public:
  ConeCompiler(CnfFormula& f, const Circuit& c) : f_(f), c_(c) {}

  std::vector<Lit> compile(const InputBits& chosen, const InputBits& target) {
    bind_root(c_.chosen_root, chosen, "chosen");
    bind_root(c_.target_root, target, "target");
    bits_.resize(c_.nodes.size());
    done_.resize(c_.nodes.size(), false);
    std::vector<bool> reach(c_.nodes.size(), false);
    mark_reachable(c_.output_root, reach);
    for (NodeId id = 0; id < c_.nodes.size(); id++) {
      if (reach[id] && !done_[id]) compile_node(id);
    }
    return bits_[c_.output_root];
  }

  // Asserts lit a equals lit b (either side may be a constant sentinel).
  void tie(Lit a, Lit b) {
    if (lit_is_const(a) && lit_is_const(b)) {
      if (a != b) f_.add_clause({});
      return;
    }
    if (lit_is_const(b)) std::swap(a, b);
    if (lit_is_const(a)) {
      f_.add_clause({a == kTrueLit ? b : -b});
      return;
    }
    if (a == b) return;
    if (a == -b) {
      f_.add_clause({});
      return;
    }
    f_.add_clause({-a, b});
    f_.add_clause({a, -b});
  }

 private:
  void bind_root(NodeId id, const InputBits& in, const char* name) {
    const Node& n = c_.nodes[id];
    if (in.width() != n.width) {
      throw CnfError(std::string(name) + " binding width " +
                     std::to_string(in.width()) + " != root width " +
                     std::to_string(n.width));
    }
    std::vector<Lit> lits(n.width);
    for (uint32_t i = 0; i < n.width; i++) {
      lits[i] = in.is_const() ? const_lit(in.value().bit(i))
                              : static_cast<Lit>(in.variables()[i]);
    }
    bound_[id] = std::move(lits);
  }

  void mark_reachable(NodeId id, std::vector<bool>& reach) {
    if (reach[id]) return;
    reach[id] = true;
    for (NodeId o : c_.nodes[id].operands) mark_reachable(o, reach);
  }

  Lit mk_and(Lit a, Lit b) {
    if (a == kFalseLit || b == kFalseLit) return kFalseLit;
    if (a == kTrueLit) return b;
    if (b == kTrueLit) return a;
    if (a == b) return a;
    if (a == -b) return kFalseLit;
    Lit y = static_cast<Lit>(f_.new_var());
    f_.add_clause({-y, a});
    f_.add_clause({-y, b});
    f_.add_clause({-a, -b, y});
    return y;
  }

  Lit mk_and_many(std::vector<Lit> ls) {
    std::vector<Lit> kept;
    for (Lit l : ls) {
      if (l == kFalseLit) return kFalseLit;
      if (l == kTrueLit) continue;
      for (Lit k : kept) {
        if (k == -l) return kFalseLit;
      }
      if (std::find(kept.begin(), kept.end(), l) == kept.end())
        kept.push_back(l);
    }
    if (kept.empty()) return kTrueLit;
    if (kept.size() == 1) return kept[0];
    if (kept.size() == 2) return mk_and(kept[0], kept[1]);
    Lit y = static_cast<Lit>(f_.new_var());
    Clause big{y};
    for (Lit l : kept) {
      f_.add_clause({-y, l});
      big.push_back(-l);
    }
    f_.add_clause(std::move(big));
    return y;
  }

  Lit mk_or_many(std::vector<Lit> ls) {
    for (Lit& l : ls) l = -l;
    return -mk_and_many(std::move(ls));
  }

  Lit mk_xor_many(const std::vector<Lit>& ls) {
    bool cparity = false;  // xor of constant operands
    std::vector<Lit> varlits;
    for (Lit l : ls) {
      if (lit_is_const(l)) {
        cparity ^= (l == kTrueLit);
      } else {
        varlits.push_back(l);
      }
    }
    // value = cparity ^ xor(varlits); canonicalize the variable part.
    XorClause x0 = XorClause::from_lits(std::move(varlits), false);
    bool c = cparity ^ x0.rhs;  // value = xor(x0.vars) ^ c
    if (x0.vars.empty()) return const_lit(c);
    if (x0.vars.size() == 1) {
      Lit v = static_cast<Lit>(x0.vars[0]);
      return c ? -v : v;
    }
    Lit y = static_cast<Lit>(f_.new_var());
    XorClause x;
    x.vars = x0.vars;
    x.vars.push_back(static_cast<Var>(y));
    std::sort(x.vars.begin(), x.vars.end());
    x.rhs = c;  // y = xor(vars) ^ c  <=>  xor(vars ∪ {y}) = c
    f_.add_xor_clause(x);
    return y;
  }

  Lit mk_maj(Lit a, Lit b, Lit c) {
    if (a == kTrueLit) return mk_or_many({b, c});
    if (a == kFalseLit) return mk_and(b, c);
    if (b == kTrueLit) return mk_or_many({a, c});
    if (b == kFalseLit) return mk_and(a, c);
    if (c == kTrueLit) return mk_or_many({a, b});
    if (c == kFalseLit) return mk_and(a, b);
    if (a == b) return a;
    if (a == -b) return c;
    if (a == c) return a;
    if (a == -c) return b;
    if (b == c) return b;
    if (b == -c) return a;
    Lit y = static_cast<Lit>(f_.new_var());
    f_.add_clause({-a, -b, y});
    f_.add_clause({-a, -c, y});
    f_.add_clause({-b, -c, y});
    f_.add_clause({a, b, -y});
    f_.add_clause({a, c, -y});
    f_.add_clause({b, c, -y});
    return y;
  }

  Lit mk_ite(Lit c, Lit t, Lit e) {
    if (c == kTrueLit) return t;
    if (c == kFalseLit) return e;
    if (t == e) return t;
    if (t == kTrueLit) return mk_or_many({c, e});
    if (t == kFalseLit) return mk_and(-c, e);
    if (e == kTrueLit) return mk_or_many({-c, t});
    if (e == kFalseLit) return mk_and(c, t);
    if (t == -e) return -mk_xor_many({c, t});
    Lit y = static_cast<Lit>(f_.new_var());
    f_.add_clause({-c, -t, y});
    f_.add_clause({-c, t, -y});
    f_.add_clause({c, -e, y});
    f_.add_clause({c, e, -y});
    return y;
  }

  // sum and carry of a full-adder cell
  std::pair<Lit, Lit> full_add(Lit a, Lit b, Lit cin) {
    return {mk_xor_many({a, b, cin}), mk_maj(a, b, cin)};
  }

  std::vector<Lit> ripple_add(const std::vector<Lit>& a,
                              const std::vector<Lit>& b, Lit cin,
                              Lit* cout = nullptr) {
    std::vector<Lit> sum(a.size());
    Lit c = cin;
    for (size_t i = 0; i < a.size(); i++) {
      auto [s, co] = full_add(a[i], b[i], c);
      sum[i] = s;
      c = co;
    }
    if (cout) *cout = c;
    return sum;
  }

  // carry-out of a + ~b + 1; a < b iff this is false
  Lit ult_lit(const std::vector<Lit>& a, const std::vector<Lit>& b) {
    Lit c = kTrueLit;
    for (size_t i = 0; i < a.size(); i++) c = mk_maj(a[i], -b[i], c);
    return -c;
  }

  Lit eq_lit(const std::vector<Lit>& a, const std::vector<Lit>& b) {
    std::vector<Lit> eqs(a.size());
    for (size_t i = 0; i < a.size(); i++) eqs[i] = -mk_xor_many({a[i], b[i]});
    return mk_and_many(std::move(eqs));
  }

  std::vector<Lit> mult_bits(const std::vector<Lit>& a,
                             const std::vector<Lit>& b) {
    size_t w = a.size();
    std::vector<Lit> acc(w, kFalseLit);
    for (size_t i = 0; i < w; i++) {
      std::vector<Lit> partial(w, kFalseLit);
      for (size_t j = 0; i + j < w; j++) partial[i + j] = mk_and(b[i], a[j]);
      acc = ripple_add(acc, partial, kFalseLit);
    }
    return acc;
  }

  std::vector<Lit> udiv_bits(const std::vector<Lit>& n,
                             const std::vector<Lit>& d) {
    size_t w = n.size();
    std::vector<Lit> q(w), r(w);
    for (size_t i = 0; i < w; i++) q[i] = static_cast<Lit>(f_.new_var());
    for (size_t i = 0; i < w; i++) r[i] = static_cast<Lit>(f_.new_var());
    // Relational encoding: q*d computed at double width, plus r, equals n.
    // Widths are exact, so no wrap-around solutions exist.
    std::vector<Lit> qw = q, dw = d, rw = r, nw = n;
    qw.resize(2 * w, kFalseLit);
    dw.resize(2 * w, kFalseLit);
    rw.resize(2 * w, kFalseLit);
    nw.resize(2 * w, kFalseLit);
    std::vector<Lit> prod = mult_bits(qw, dw);
    std::vector<Lit> sum = ripple_add(prod, rw, kFalseLit);
    for (size_t i = 0; i < 2 * w; i++) tie(sum[i], nw[i]);
    // d != 0 -> r < d; d == 0 -> q all ones and r == n.
    std::vector<Lit> dz_terms(w);
    for (size_t i = 0; i < w; i++) dz_terms[i] = -d[i];
    Lit dz = mk_and_many(std::move(dz_terms));
    Lit rlt = ult_lit(r, d);
    if (dz == kFalseLit) {
      tie(rlt, kTrueLit);
    } else if (dz == kTrueLit) {
      for (size_t i = 0; i < w; i++) tie(q[i], kTrueLit);
      for (size_t i = 0; i < w; i++) tie(r[i], n[i]);
    } else {
      if (rlt == kFalseLit) {
        f_.add_clause({dz});
      } else if (rlt != kTrueLit) {
        f_.add_clause({dz, rlt});
      }
      for (size_t i = 0; i < w; i++) f_.add_clause({-dz, q[i]});
      for (size_t i = 0; i < w; i++) {
        if (lit_is_const(n[i])) {
          f_.add_clause({-dz, n[i] == kTrueLit ? r[i] : -r[i]});
        } else {
          f_.add_clause({-dz, -r[i], n[i]});
          f_.add_clause({-dz, r[i], -n[i]});
        }
      }
    }
    return q;
  }

  void compile_node(NodeId id) {
    const Node& n = c_.nodes[id];
    std::vector<Lit> out;
    auto bits_of = [&](NodeId o) -> const std::vector<Lit>& {
      return bits_[o];
    };
    switch (n.op) {
      case Op::kConst: {
        out.resize(n.width);
        for (uint32_t i = 0; i < n.width; i++)
          out[i] = const_lit(n.cval.bit(i));
        break;
      }
      case Op::kVar: {
        auto it = bound_.find(id);
        if (it == bound_.end()) throw CnfError("unbound input root");
        out = it->second;
        break;
      }
      case Op::kAnd:
      case Op::kOr:
      case Op::kXor: {
        out.resize(n.width);
        for (uint32_t i = 0; i < n.width; i++) {
          std::vector<Lit> ls;
          ls.reserve(n.operands.size());
          for (NodeId o : n.operands) ls.push_back(bits_of(o)[i]);
          out[i] = n.op == Op::kAnd  ? mk_and_many(std::move(ls))
                   : n.op == Op::kOr ? mk_or_many(std::move(ls))
                                     : mk_xor_many(ls);
        }
        break;
      }
      case Op::kNot: {
        out = bits_of(n.operands[0]);
        for (Lit& l : out) l = -l;
        break;
      }
      case Op::kAdd:
        out = ripple_add(bits_of(n.operands[0]), bits_of(n.operands[1]),
                         kFalseLit);
        break;
      case Op::kSub: {
        std::vector<Lit> nb = bits_of(n.operands[1]);
        for (Lit& l : nb) l = -l;
        out = ripple_add(bits_of(n.operands[0]), nb, kTrueLit);
        break;
      }
      case Op::kMult:
        out = mult_bits(bits_of(n.operands[0]), bits_of(n.operands[1]));
        break;
      case Op::kUdiv:
        out = udiv_bits(bits_of(n.operands[0]), bits_of(n.operands[1]));
        break;
      case Op::kUlt:
        out = {ult_lit(bits_of(n.operands[0]), bits_of(n.operands[1]))};
        break;
      case Op::kUgt:
        out = {ult_lit(bits_of(n.operands[1]), bits_of(n.operands[0]))};
        break;
      case Op::kEq:
        out = {eq_lit(bits_of(n.operands[0]), bits_of(n.operands[1]))};
        break;
      case Op::kIte: {
        Lit c = bits_of(n.operands[0])[0];
        const auto& t = bits_of(n.operands[1]);
        const auto& e = bits_of(n.operands[2]);
        out.resize(n.width);
        for (uint32_t i = 0; i < n.width; i++) out[i] = mk_ite(c, t[i], e[i]);
        break;
      }
      case Op::kExtract: {
        const auto& a = bits_of(n.operands[0]);
        out.assign(a.begin() + n.lo, a.begin() + n.hi + 1);
        break;
      }
      case Op::kConcat: {
        const auto& hi = bits_of(n.operands[0]);
        const auto& lo = bits_of(n.operands[1]);
        out = lo;
        out.insert(out.end(), hi.begin(), hi.end());
        break;
      }
    }
    bits_[id] = std::move(out);
    done_[id] = true;
  }

  CnfFormula& f_;
  const Circuit& c_;
  std::vector<std::vector<Lit>> bits_;
  std::vector<bool> done_;
  std::map<NodeId, std::vector<Lit>> bound_;
};

}  // namespace

CnfFormula tseitin_compile(const Circuit& c) {
  CnfFormula f;
  BitMap& m = f.bitmap;
  for (uint32_t i = 0; i < c.chosen_width(); i++) m.chosen.push_back(f.new_var());
  for (uint32_t i = 0; i < c.target_width(); i++) m.target.push_back(f.new_var());
  for (uint32_t i = 0; i < c.output_width(); i++) m.output.push_back(f.new_var());
  ConeCompiler cc(f, c);
  std::vector<Lit> out =
      cc.compile(InputBits::vars(m.chosen), InputBits::vars(m.target));
  for (uint32_t i = 0; i < c.output_width(); i++) {
    cc.tie(static_cast<Lit>(m.output[i]), out[i]);
  }
  return f;
}

std::vector<Var> append_cone(CnfFormula& f, const Circuit& c,
                             const InputBits& chosen, const InputBits& target,
                             const std::optional<BitVec>& forced_output) {
  ConeCompiler cc(f, c);
  std::vector<Lit> out = cc.compile(chosen, target);
  if (forced_output) {
    if (forced_output->width() != c.output_width()) {
      throw CnfError("forced output width " +
                     std::to_string(forced_output->width()) +
                     " != output width " + std::to_string(c.output_width()));
    }
    for (uint32_t i = 0; i < c.output_width(); i++) {
      cc.tie(out[i], const_lit(forced_output->bit(i)));
    }
    return {};
  }
  std::vector<Var> vars;
  for (uint32_t i = 0; i < c.output_width(); i++) {
    Var v = f.new_var();
    cc.tie(static_cast<Lit>(v), out[i]);
    vars.push_back(v);
  }
  return vars;
}

namespace {

// All 2^(k-1) clauses ruling out assignments of the wrong parity; k <= 3.
void expand_xor(CnfFormula& f, const std::vector<Var>& vars, bool rhs) {
  size_t k = vars.size();
  for (uint32_t bits = 0; bits < (1u << k); bits++) {
    bool parity = false;
    for (size_t i = 0; i < k; i++) parity ^= ((bits >> i) & 1) != 0;
    if (parity == rhs) continue;  // satisfying assignment, no clause
    Clause cl(k);
    for (size_t i = 0; i < k; i++) {
      Var v = vars[i];
      cl[i] = ((bits >> i) & 1) ? -static_cast<Lit>(v) : static_cast<Lit>(v);
    }
    f.add_clause(std::move(cl));
  }
}

}  // namespace

void blast_xors(CnfFormula& f) {
  std::vector<XorClause> xs;
  xs.swap(f.xors);
  for (const XorClause& x : xs) {
    std::vector<Var> rest = x.vars;
    // Chain 3-var chunks: fold the first two vars into a fresh variable
    // until at most three remain, then expand the tail with the parity bit.
    while (rest.size() > 3) {
      Var t = f.new_var();
      expand_xor(f, {rest[0], rest[1], t}, false);
      rest.erase(rest.begin(), rest.begin() + 2);
      rest.insert(rest.begin(), t);
    }
    expand_xor(f, rest, x.rhs);
  }
}

void write_dimacs(const CnfFormula& f, std::ostream& out) {
  out << "p cnf " << f.num_vars << ' ' << f.clauses.size() << '\n';
  for (const Clause& c : f.clauses) {
    for (Lit l : c) out << l << ' ';
    out << "0\n";
  }
  for (const XorClause& x : f.xors) {
    out << 'x';
    for (size_t i = 0; i < x.vars.size(); i++) {
      if (i == 0 && !x.rhs) out << '-';
      out << x.vars[i] << ' ';
    }
    out << "0\n";
  }
}

CnfFormula read_dimacs(std::istream& in) {
  CnfFormula f;
  bool have_header = false;
  size_t expected_clauses = 0;
  size_t lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw CnfError("line " + std::to_string(lineno) + ": " + msg);
  };
  std::string line;
  while (std::getline(in, line)) {
    lineno++;
    if (line.empty()) continue;
    size_t pos = line.find_first_not_of(" \t");
    if (pos == std::string::npos) continue;
    if (line[pos] == 'c') continue;
    if (line[pos] == 'p') {
      std::istringstream ss(line.substr(pos + 1));
      std::string kind;
      ss >> kind >> f.num_vars >> expected_clauses;
      if (kind != "cnf" || !ss) fail("bad DIMACS header: " + line);
      have_header = true;
      continue;
    }
    if (!have_header) fail("clause before DIMACS header");
    bool is_xor = line[pos] == 'x';
    if (is_xor) pos++;
    std::istringstream ss(line.substr(pos));
    std::vector<Lit> lits;
    Lit l;
    bool terminated = false;
    while (ss >> l) {
      if (l == 0) {
        terminated = true;
        break;
      }
      Var v = static_cast<Var>(l < 0 ? -l : l);
      if (v > f.num_vars) {
        fail("literal " + std::to_string(l) +
             " exceeds declared variable count");
      }
      lits.push_back(l);
    }
    if (!terminated) fail("clause missing 0 terminator: " + line);
    if (is_xor) {
      bool rhs = true;
      if (!lits.empty() && lits[0] < 0) {
        rhs = false;
        lits[0] = -lits[0];
      }
      f.add_xor(std::move(lits), rhs);
    } else {
      f.add_clause(std::move(lits));
    }
  }
  if (!have_header) throw CnfError("missing DIMACS header");
  return f;
}

}  // namespace mcfil
