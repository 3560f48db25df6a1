#include "mcfil/circuit.hpp"

#include <algorithm>

#include "mcfil/errors.hpp"

namespace mcfil {

const char* op_name(Op op) {
  switch (op) {
    case Op::kConst: return "CONST";
    case Op::kVar: return "VAR";
    case Op::kAnd: return "AND";
    case Op::kOr: return "OR";
    case Op::kXor: return "XOR";
    case Op::kNot: return "NOT";
    case Op::kAdd: return "ADD";
    case Op::kSub: return "SUB";
    case Op::kMult: return "MULT";
    case Op::kUdiv: return "UDIV";
    case Op::kUlt: return "ULT";
    case Op::kUgt: return "UGT";
    case Op::kEq: return "EQ";
    case Op::kIte: return "ITE";
    case Op::kExtract: return "EXTRACT";
    case Op::kConcat: return "CONCAT";
  }
  return "?";
}

namespace {

void check_width(uint32_t w, const char* what) {
  if (w < 1 || w > kMaxWidth) {
    throw CircuitError(std::string(what) + ": width " + std::to_string(w) +
                       " outside [1, " + std::to_string(kMaxWidth) + "]");
  }
}

std::string node_key(const Node& n) {
  std::string k;
  k += static_cast<char>('A' + static_cast<int>(n.op));
  k += std::to_string(n.width);
  if (n.op == Op::kConst) {
    k += ':' + n.cval.to_hex();
  } else if (n.op == Op::kVar) {
    k += n.role == VarRole::kChosen ? ":c" : ":t";
  } else if (n.op == Op::kExtract) {
    k += ':' + std::to_string(n.hi) + ':' + std::to_string(n.lo);
  }
  for (NodeId id : n.operands) k += ',' + std::to_string(id);
  return k;
}

}  // namespace

NodeRef CircuitBuilder::intern(Node n) {
  std::string key = node_key(n);
  auto it = cache_.find(key);
  if (it != cache_.end()) return {it->second};
  NodeId id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back(std::move(n));
  cache_.emplace(std::move(key), id);
  return {id};
}

NodeRef CircuitBuilder::chosen(uint32_t width) {
  check_width(width, "VAR");
  if (chosen_) throw CircuitError("chosen root already declared");
  Node n{Op::kVar, width, {}, BitVec(width), VarRole::kChosen};
  NodeRef r = intern(std::move(n));
  chosen_ = r.id;
  return r;
}

NodeRef CircuitBuilder::target(uint32_t width) {
  check_width(width, "VAR");
  if (target_) throw CircuitError("target root already declared");
  Node n{Op::kVar, width, {}, BitVec(width), VarRole::kTarget};
  NodeRef r = intern(std::move(n));
  target_ = r.id;
  return r;
}

NodeRef CircuitBuilder::constant(const BitVec& v) {
  Node n{Op::kConst, v.width(), {}, v};
  return intern(std::move(n));
}

NodeRef CircuitBuilder::nary(Op op, const std::vector<NodeRef>& operands) {
  if (op != Op::kAnd && op != Op::kOr && op != Op::kXor) {
    throw CircuitError(std::string("nary: unsupported op ") + op_name(op));
  }
  if (operands.size() < 2) throw CircuitError("nary: need >= 2 operands");
  uint32_t w = width_of(operands[0]);
  Node n{op, w, {}, BitVec(w)};
  for (NodeRef r : operands) {
    if (width_of(r) != w) {
      throw CircuitError(std::string(op_name(op)) + ": width mismatch " +
                         std::to_string(width_of(r)) + " vs " +
                         std::to_string(w));
    }
    n.operands.push_back(r.id);
  }
  return intern(std::move(n));
}

NodeRef CircuitBuilder::bnot(NodeRef a) {
  Node n{Op::kNot, width_of(a), {a.id}, BitVec(width_of(a))};
  return intern(std::move(n));
}

NodeRef CircuitBuilder::binary(Op op, NodeRef a, NodeRef b) {
  uint32_t wa = width_of(a), wb = width_of(b);
  if (wa != wb) {
    throw CircuitError(std::string(op_name(op)) + ": width mismatch " +
                       std::to_string(wa) + " vs " + std::to_string(wb));
  }
  bool cmp = op == Op::kUlt || op == Op::kUgt || op == Op::kEq;
  Node n{op, cmp ? 1 : wa, {a.id, b.id}, BitVec(1)};
  return intern(std::move(n));
}

NodeRef CircuitBuilder::ite(NodeRef cond, NodeRef t, NodeRef e) {
  if (width_of(cond) != 1) throw CircuitError("ITE: condition width must be 1");
  if (width_of(t) != width_of(e)) {
    throw CircuitError("ITE: branch width mismatch " +
                       std::to_string(width_of(t)) + " vs " +
                       std::to_string(width_of(e)));
  }
  Node n{Op::kIte, width_of(t), {cond.id, t.id, e.id}, BitVec(1)};
  return intern(std::move(n));
}

NodeRef CircuitBuilder::extract(NodeRef a, uint32_t hi, uint32_t lo) {
  uint32_t w = width_of(a);
  if (lo > hi || hi >= w) {
    throw CircuitError("EXTRACT: range [" + std::to_string(hi) + ":" +
                       std::to_string(lo) + "] invalid for width " +
                       std::to_string(w));
  }
  Node n{Op::kExtract, hi - lo + 1, {a.id}, BitVec(1)};
  n.hi = hi;
  n.lo = lo;
  return intern(std::move(n));
}

NodeRef CircuitBuilder::concat(NodeRef high, NodeRef low) {
  uint32_t w = width_of(high) + width_of(low);
  check_width(w, "CONCAT");
  Node n{Op::kConcat, w, {high.id, low.id}, BitVec(1)};
  return intern(std::move(n));
}

NodeRef CircuitBuilder::zext(NodeRef a, uint32_t new_width) {
  uint32_t w = width_of(a);
  if (new_width <= w) throw CircuitError("zext: target width too small");
  return concat(constant(BitVec(new_width - w)), a);
}

void CircuitBuilder::set_output(NodeRef r) { output_ = r.id; }

Circuit CircuitBuilder::build() {
  if (!chosen_ || !target_ || !output_) {
    throw CircuitError("circuit needs chosen, target and output roots");
  }
  Circuit c;
  c.nodes = std::move(nodes_);
  c.chosen_root = *chosen_;
  c.target_root = *target_;
  c.output_root = *output_;
  return c;
}

BitVec evaluate(const Circuit& c, const BitVec& chosen, const BitVec& target) {
  if (chosen.width() != c.chosen_width()) {
    throw CircuitError("evaluate: chosen width " +
                       std::to_string(chosen.width()) + " != " +
                       std::to_string(c.chosen_width()));
  }
  if (target.width() != c.target_width()) {
    throw CircuitError("evaluate: target width " +
                       std::to_string(target.width()) + " != " +
                       std::to_string(c.target_width()));
  }
  std::vector<BitVec> val(c.nodes.size());
  // Nodes are created bottom-up, so ids are already topologically ordered.
  for (NodeId id = 0; id < c.nodes.size(); id++) {
    const Node& n = c.nodes[id];
    auto op0 = [&]() -> const BitVec& { return val[n.operands[0]]; };
    auto op1 = [&]() -> const BitVec& { return val[n.operands[1]]; };
    switch (n.op) {
      case Op::kConst: val[id] = n.cval; break;
      case Op::kVar:
        val[id] = n.role == VarRole::kChosen ? chosen : target;
        break;
      case Op::kAnd:
      case Op::kOr:
      case Op::kXor: {
        BitVec acc = val[n.operands[0]];
        for (size_t i = 1; i < n.operands.size(); i++) {
          const BitVec& o = val[n.operands[i]];
          acc = n.op == Op::kAnd ? acc.band(o)
                : n.op == Op::kOr ? acc.bor(o)
                                  : acc.bxor(o);
        }
        val[id] = acc;
        break;
      }
      case Op::kNot: val[id] = op0().bnot(); break;
      case Op::kAdd: val[id] = op0().add(op1()); break;
      case Op::kSub: val[id] = op0().sub(op1()); break;
      case Op::kMult: val[id] = op0().mult(op1()); break;
      case Op::kUdiv: val[id] = op0().udiv(op1()); break;
      case Op::kUlt: val[id] = BitVec(1, op0().ult(op1()) ? 1 : 0); break;
      case Op::kUgt: val[id] = BitVec(1, op0().ugt(op1()) ? 1 : 0); break;
      case Op::kEq: val[id] = BitVec(1, op0() == op1() ? 1 : 0); break;
      case Op::kIte:
        val[id] = val[n.operands[0]].bit(0) ? val[n.operands[1]]
                                            : val[n.operands[2]];
        break;
      case Op::kExtract: val[id] = op0().extract(n.hi, n.lo); break;
      case Op::kConcat: val[id] = op0().concat(op1()); break;
    }
  }
  return val[c.output_root];
}

}  // namespace mcfil
