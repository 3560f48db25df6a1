#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mcfil/bitvec.hpp"

namespace mcfil {

enum class Op : uint8_t {
  kConst,
  kVar,
  kAnd,
  kOr,
  kXor,
  kNot,
  kAdd,
  kSub,
  kMult,
  kUdiv,
  kUlt,
  kUgt,
  kEq,
  kIte,
  kExtract,
  kConcat,
};

const char* op_name(Op op);

using NodeId = uint32_t;

// Which input root a kVar node stands for.
enum class VarRole : uint8_t { kChosen, kTarget };

struct Node {
  Op op;
  uint32_t width;
  std::vector<NodeId> operands;  // ordered; n-ary for kAnd/kOr/kXor
  BitVec cval;                   // kConst payload
  VarRole role = VarRole::kChosen;
  uint32_t lo = 0, hi = 0;  // kExtract payload
};

// Immutable DAG over two input variables. Exactly one chosen root, one
// target root, one designated output node. Safe to share across threads.
struct Circuit {
  std::vector<Node> nodes;
  NodeId chosen_root = 0;
  NodeId target_root = 0;
  NodeId output_root = 0;

  uint32_t chosen_width() const { return nodes[chosen_root].width; }
  uint32_t target_width() const { return nodes[target_root].width; }
  uint32_t output_width() const { return nodes[output_root].width; }
  uint32_t width_of(NodeId id) const { return nodes[id].width; }
};

// Reference handle used while building; just an id plus the builder's
// bookkeeping for width checks.
struct NodeRef {
  NodeId id;
};

// Builds circuits with structural deduplication: constructing the same node
// twice returns the same id, so shared subterms stay shared in the CNF.
class CircuitBuilder {
 public:
  NodeRef chosen(uint32_t width);
  NodeRef target(uint32_t width);
  NodeRef constant(const BitVec& v);
  NodeRef constant(uint32_t width, uint64_t v) {
    return constant(BitVec(width, v));
  }

  NodeRef band(NodeRef a, NodeRef b) { return nary(Op::kAnd, {a, b}); }
  NodeRef bor(NodeRef a, NodeRef b) { return nary(Op::kOr, {a, b}); }
  NodeRef bxor(NodeRef a, NodeRef b) { return nary(Op::kXor, {a, b}); }
  // n-ary forms keep wide gates as single nodes (one XorClause per bit).
  NodeRef nary(Op op, const std::vector<NodeRef>& operands);
  NodeRef bnot(NodeRef a);

  NodeRef add(NodeRef a, NodeRef b) { return binary(Op::kAdd, a, b); }
  NodeRef sub(NodeRef a, NodeRef b) { return binary(Op::kSub, a, b); }
  NodeRef mult(NodeRef a, NodeRef b) { return binary(Op::kMult, a, b); }
  NodeRef udiv(NodeRef a, NodeRef b) { return binary(Op::kUdiv, a, b); }

  NodeRef ult(NodeRef a, NodeRef b) { return binary(Op::kUlt, a, b); }
  NodeRef ugt(NodeRef a, NodeRef b) { return binary(Op::kUgt, a, b); }
  NodeRef eq(NodeRef a, NodeRef b) { return binary(Op::kEq, a, b); }

  // cond must have width 1; t and e equal widths.
  NodeRef ite(NodeRef cond, NodeRef t, NodeRef e);
  NodeRef extract(NodeRef a, uint32_t hi, uint32_t lo);
  // high.concat(low): high bits above low bits.
  NodeRef concat(NodeRef high, NodeRef low);
  NodeRef zext(NodeRef a, uint32_t new_width);

  uint32_t width_of(NodeRef r) const { return nodes_[r.id].width; }

  void set_output(NodeRef r);
  Circuit build();

 private:
  NodeRef binary(Op op, NodeRef a, NodeRef b);
  NodeRef intern(Node n);

  std::vector<Node> nodes_;
  std::unordered_map<std::string, NodeId> cache_;
  std::optional<NodeId> chosen_, target_, output_;
};

// Reference semantics of the DAG; the ground truth the CNF layer is tested
// against. Throws CircuitError on width mismatch with the roots.
BitVec evaluate(const Circuit& c, const BitVec& chosen, const BitVec& target);

}  // namespace mcfil
