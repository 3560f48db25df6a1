#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cstdint>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "mcfil/cnf.hpp"
#include "mcfil/errors.hpp"
#include "mcfil/functionality.hpp"
#include "mcfil/rng.hpp"
#include "mcfil/solver.hpp"

using namespace mcfil;

namespace {

// Truth-table check of a compiled formula against the circuit evaluator:
// for every (chosen, target) pair, fixing the input bits must leave the
// formula satisfiable with the output bits equal to evaluate().
void check_equisatisfiable(const Circuit& c, const CnfFormula& f) {
  SolverConfig scfg;
  uint32_t cw = c.chosen_width(), tw = c.target_width();
  REQUIRE(cw + tw <= 16);
  for (uint64_t a = 0; a < (uint64_t{1} << cw); a++) {
    for (uint64_t t = 0; t < (uint64_t{1} << tw); t++) {
      std::vector<Lit> assume;
      for (uint32_t i = 0; i < cw; i++) {
        Lit v = static_cast<Lit>(f.bitmap.chosen[i]);
        assume.push_back((a >> i) & 1 ? v : -v);
      }
      for (uint32_t i = 0; i < tw; i++) {
        Lit v = static_cast<Lit>(f.bitmap.target[i]);
        assume.push_back((t >> i) & 1 ? v : -v);
      }
      SolveResult r = solve(f, assume, scfg);
      REQUIRE(r.status == SolveStatus::kSat);
      BitVec want = evaluate(c, BitVec(cw, a), BitVec(tw, t));
      for (uint32_t i = 0; i < c.output_width(); i++) {
        REQUIRE(r.value(f.bitmap.output[i]) == want.bit(i));
      }
    }
  }
}

CnfFormula random_formula(RngStream& rng, Var nvars, int nclauses, int nxors) {
  CnfFormula f;
  f.num_vars = nvars;
  for (int i = 0; i < nclauses; i++) {
    Clause c;
    int len = 1 + static_cast<int>(rng.below(3));
    for (int j = 0; j < len; j++) {
      Var v = 1 + static_cast<Var>(rng.below(nvars));
      c.push_back(rng.next_bit() ? static_cast<Lit>(v) : -static_cast<Lit>(v));
    }
    f.add_clause(c);
  }
  for (int i = 0; i < nxors; i++) {
    std::vector<Lit> lits;
    int len = 2 + static_cast<int>(rng.below(4));
    for (int j = 0; j < len; j++) {
      Var v = 1 + static_cast<Var>(rng.below(nvars));
      lits.push_back(rng.next_bit() ? static_cast<Lit>(v)
                                    : -static_cast<Lit>(v));
    }
    f.add_xor(lits, rng.next_bit());
  }
  return f;
}

}  // namespace

TEST_CASE("AND gate compiles to the biconditional clause triple") {
  CnfFormula f = tseitin_compile(and_gate().build());
  Lit a = static_cast<Lit>(f.bitmap.chosen[0]);
  Lit b = static_cast<Lit>(f.bitmap.target[0]);
  // The gate variable is whichever var the two binary clauses agree on.
  bool found = false;
  for (Var g = 1; g <= f.num_vars && !found; g++) {
    Lit y = static_cast<Lit>(g);
    auto has = [&](Clause want) {
      std::sort(want.begin(), want.end());
      for (Clause c : f.clauses) {
        std::sort(c.begin(), c.end());
        if (c == want) return true;
      }
      return false;
    };
    found = has({-y, a}) && has({-y, b}) && has({-a, -b, y});
  }
  CHECK(found);
  CHECK(f.xors.empty());
}

TEST_CASE("wide parity stays one clause instead of exponential CNF") {
  CircuitBuilder b;
  NodeRef ch = b.chosen(8);
  b.target(1);
  std::vector<NodeRef> bits;
  for (uint32_t i = 0; i < 8; i++) bits.push_back(b.extract(ch, i, i));
  b.set_output(b.nary(Op::kXor, bits));
  CnfFormula f = tseitin_compile(b.build());
  REQUIRE(f.xors.size() == 1);
  CHECK(f.xors[0].vars.size() >= 8);
  CHECK(f.clauses.size() < 8);
}

TEST_CASE("compiled formulas are equisatisfiable with the evaluator") {
  check_equisatisfiable(and_gate().build(), tseitin_compile(and_gate().build()));
  {
    Circuit c = millionaires(6).build();
    check_equisatisfiable(c, tseitin_compile(c));
  }
  {
    Circuit c = mean_average(4).build();
    check_equisatisfiable(c, tseitin_compile(c));
  }
  {
    Circuit c = bucketed_mean(4, 4).build();
    check_equisatisfiable(c, tseitin_compile(c));
  }
  {
    Circuit c = wage(4, WageVariant::kStandardDiv).build();
    check_equisatisfiable(c, tseitin_compile(c));
  }
  {
    Circuit c = dual_execution_affine(2).build();
    check_equisatisfiable(c, tseitin_compile(c));
  }
}

TEST_CASE("each input pair extends to exactly one full model") {
  // Biconditional encoding: total model count equals the input-space size.
  Circuit c = millionaires(4).build();
  CnfFormula f = tseitin_compile(c);
  std::vector<Var> all;
  for (Var v = 1; v <= f.num_vars; v++) all.push_back(v);
  SolverConfig scfg;
  EnumerationResult r = enumerate_models(f, all, 300, scfg);
  CHECK(r.complete);
  CHECK(r.models.size() == 256);
}

TEST_CASE("output bits match the evaluator on random wide inputs") {
  Circuit c = millionaires(8).build();
  CnfFormula f = tseitin_compile(c);
  SolverConfig scfg;
  RngStream rng(11, "test.cnf", 0);
  for (int i = 0; i < 200; i++) {
    uint64_t a = rng.below(256), t = rng.below(256);
    std::vector<Lit> assume;
    for (uint32_t j = 0; j < 8; j++) {
      Lit cv = static_cast<Lit>(f.bitmap.chosen[j]);
      Lit tv = static_cast<Lit>(f.bitmap.target[j]);
      assume.push_back((a >> j) & 1 ? cv : -cv);
      assume.push_back((t >> j) & 1 ? tv : -tv);
    }
    SolveResult r = solve(f, assume, scfg);
    REQUIRE(r.status == SolveStatus::kSat);
    CHECK(r.value(f.bitmap.output[0]) == (a > t));
  }
}

TEST_CASE("blast_xors expands parities equisatisfiably") {
  {
    CnfFormula f;
    f.num_vars = 3;
    f.add_clause({1, 2});
    CnfFormula g = f;
    blast_xors(g);
    CHECK(g.clauses == f.clauses);
    CHECK(g.num_vars == f.num_vars);
  }
  {
    CnfFormula f;
    f.num_vars = 1;
    f.add_xor({1}, true);
    CHECK(f.xors.empty());  // single-var parity lands as a unit clause
    REQUIRE(f.clauses.size() == 1);
    CHECK(f.clauses[0] == Clause{1});
  }
  {
    CnfFormula f;
    f.num_vars = 3;
    f.add_xor({1, 2, 3}, false);
    blast_xors(f);
    CHECK(f.xors.empty());
    CHECK(f.clauses.size() == 4);
  }
}

TEST_CASE("blast_xors preserves projected model counts") {
  RngStream rng(17, "test.cnf", 1);
  SolverConfig scfg;
  for (int trial = 0; trial < 30; trial++) {
    CnfFormula f = random_formula(rng, 8, 4, 3);
    std::vector<Var> proj;
    for (Var v = 1; v <= 8; v++) proj.push_back(v);
    EnumerationResult before = enumerate_models(f, proj, 512, scfg);
    CnfFormula g = f;
    blast_xors(g);
    CHECK(g.xors.empty());
    EnumerationResult after = enumerate_models(g, proj, 512, scfg);
    REQUIRE(before.complete);
    REQUIRE(after.complete);
    CHECK(before.models.size() == after.models.size());
  }
}

TEST_CASE("DIMACS grammar fixed points") {
  {
    CnfFormula f;
    f.num_vars = 2;
    f.add_clause({1, -2});
    std::ostringstream out;
    write_dimacs(f, out);
    CHECK(out.str() == "p cnf 2 1\n1 -2 0\n");
  }
  {
    CnfFormula f;
    f.num_vars = 2;
    f.add_xor({1, 2}, true);
    std::ostringstream out;
    write_dimacs(f, out);
    CHECK(out.str() == "p cnf 2 0\nx1 2 0\n");
  }
  {
    CnfFormula f;
    f.num_vars = 2;
    f.add_xor({1, 2}, false);  // rhs=0 encoded by negating the first var
    std::ostringstream out;
    write_dimacs(f, out);
    CHECK(out.str() == "p cnf 2 0\nx-1 2 0\n");
  }
}

TEST_CASE("DIMACS round-trips random formulas exactly") {
  RngStream rng(23, "test.cnf", 2);
  for (int trial = 0; trial < 50; trial++) {
    CnfFormula f = random_formula(rng, 2 + static_cast<Var>(rng.below(20)),
                                  static_cast<int>(rng.below(15)),
                                  static_cast<int>(rng.below(5)));
    std::ostringstream out;
    write_dimacs(f, out);
    std::istringstream in(out.str());
    CnfFormula g = read_dimacs(in);
    CHECK(g.num_vars == f.num_vars);
    CHECK(g.clauses == f.clauses);
    REQUIRE(g.xors.size() == f.xors.size());
    for (size_t i = 0; i < f.xors.size(); i++) CHECK(g.xors[i] == f.xors[i]);
  }
}

TEST_CASE("read_dimacs reports the offending line") {
  std::istringstream in("p cnf 2 1\n1 bogus 0\n");
  try {
    read_dimacs(in);
    FAIL("expected parse error");
  } catch (const CnfError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("append_cone with constant chosen folds small") {
  Circuit c = millionaires(8).build();
  CnfFormula f = tseitin_compile(c);
  size_t base_clauses = f.clauses.size();
  std::vector<Var> out = append_cone(f, c, InputBits::constant(BitVec(8, 100)),
                                     InputBits::vars(f.bitmap.target),
                                     std::nullopt);
  REQUIRE(out.size() == 1);
  // Constant folding keeps the appended cone below the full compile size.
  CHECK(f.clauses.size() - base_clauses < base_clauses);
  SolverConfig scfg;
  for (uint64_t t : {42u, 100u, 200u}) {
    std::vector<Lit> assume;
    for (uint32_t j = 0; j < 8; j++) {
      Lit tv = static_cast<Lit>(f.bitmap.target[j]);
      assume.push_back((t >> j) & 1 ? tv : -tv);
    }
    SolveResult r = solve(f, assume, scfg);
    REQUIRE(r.status == SolveStatus::kSat);
    CHECK(r.value(out[0]) == (100 > t));
  }
}

TEST_CASE("forced-output cone constrains instead of allocating") {
  Circuit c = millionaires(8).build();
  CnfFormula f = tseitin_compile(c);
  std::vector<Var> out = append_cone(f, c, InputBits::constant(BitVec(8, 100)),
                                     InputBits::vars(f.bitmap.target),
                                     BitVec(1, 1));
  CHECK(out.empty());
  SolverConfig scfg;
  // F(100, target) = 1 forces target < 100, so target bit 7 cannot be set.
  Lit t7 = static_cast<Lit>(f.bitmap.target[7]);
  CHECK(solve(f, {t7}, scfg).status == SolveStatus::kUnsat);
  CHECK(solve(f, {-t7}, scfg).status == SolveStatus::kSat);
}
