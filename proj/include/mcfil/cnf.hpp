#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "mcfil/bitvec.hpp"
#include "mcfil/circuit.hpp"

namespace mcfil {

// DIMACS-style literal: +v or -v, v >= 1. Never 0.
using Lit = int32_t;
using Var = uint32_t;
using Clause = std::vector<Lit>;

// Parity constraint over a set of variables: XOR of vars == rhs.
// Canonical form: vars sorted, duplicates cancelled in pairs, negations
// folded into rhs. An empty-vars clause with rhs=true is unsatisfiable and
// is represented by the formula growing an empty CNF clause instead.
struct XorClause {
  std::vector<Var> vars;
  bool rhs = false;

  XorClause() = default;
  // Builds the canonical form from literals: xor of lits == rhs. The result
  // may have empty vars (constant parity); callers decide what that means.
  static XorClause from_lits(std::vector<Lit> lits, bool rhs);

  bool operator==(const XorClause& o) const {
    return vars == o.vars && rhs == o.rhs;
  }
};

// Variable indices of the circuit roots inside a compiled formula,
// bit i of a root -> vars[i]. Inputs come first and are contiguous.
struct BitMap {
  std::vector<Var> chosen;
  std::vector<Var> target;
  std::vector<Var> output;
};

struct CnfFormula {
  Var num_vars = 0;
  std::vector<Clause> clauses;
  std::vector<XorClause> xors;
  BitMap bitmap;  // filled by tseitin_compile; empty after read_dimacs

  Var new_var() { return ++num_vars; }
  void add_clause(Clause c);
  // Canonicalizes; drops tautologies, converts contradictions to the empty
  // clause, and adds unit clauses directly for single-var parities.
  void add_xor(std::vector<Lit> lits, bool rhs);
  void add_xor_clause(const XorClause& x);
};

// Binding of one circuit input root when appending a cone: either existing
// formula variables (one per bit) or a constant value.
class InputBits {
 public:
  static InputBits vars(std::vector<Var> v);
  static InputBits constant(const BitVec& v);

  bool is_const() const { return const_.has_value(); }
  const BitVec& value() const { return *const_; }
  const std::vector<Var>& variables() const { return vars_; }
  uint32_t width() const {
    return const_ ? const_->width() : static_cast<uint32_t>(vars_.size());
  }

 private:
  std::vector<Var> vars_;
  std::optional<BitVec> const_;
};

// Compiles the full circuit into a fresh formula. Variable layout: chosen
// bits first, then target bits, then output bits, then auxiliaries, so every
// projection set of interest is a contiguous range. Gate semantics are
// encoded as biconditionals: each (chosen, target) assignment extends to
// exactly one full model, and the output bits equal evaluate().
CnfFormula tseitin_compile(const Circuit& c);

// Appends one more instance of the circuit's cone to an existing formula,
// with inputs bound to existing vars or constants. If forced_output is set,
// the cone's output is constrained to that constant and no output vars are
// allocated; otherwise fresh output vars are allocated, tied to the cone and
// returned. Constant operands fold away, so cones with a constant input
// compile small.
std::vector<Var> append_cone(CnfFormula& f, const Circuit& c,
                             const InputBits& chosen, const InputBits& target,
                             const std::optional<BitVec>& forced_output);

// Replaces native XOR clauses with CNF: chains of 3-variable chunks with
// fresh auxiliary variables, each chunk expanded to its 4 (or fewer) clauses.
void blast_xors(CnfFormula& f);

// Extended DIMACS. "p cnf <vars> <clauses>" header counts CNF clauses only;
// XOR clauses follow as "x" lines, with rhs=false encoded by negating the
// first listed variable. Round-trips (num_vars, clauses, xors) exactly.
void write_dimacs(const CnfFormula& f, std::ostream& out);
CnfFormula read_dimacs(std::istream& in);

}  // namespace mcfil
