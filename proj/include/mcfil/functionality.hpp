#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mcfil/bitvec.hpp"
#include "mcfil/circuit.hpp"

namespace mcfil {

// A functionality is a symbolic circuit builder paired with a concrete
// evaluator over the same semantics. The pairing is the module's contract:
// eval(c, t) must equal evaluate(build(), c, t) everywhere.
struct Functionality {
  std::string name;
  uint32_t chosen_width = 0;
  uint32_t target_width = 0;
  uint32_t output_width = 0;
  std::map<std::string, uint64_t> params;
  std::function<Circuit()> build;
  std::function<BitVec(const BitVec&, const BitVec&)> eval;
};

// output = chosen AND target, all widths 1.
Functionality and_gate();

// output = 1 iff chosen > target (strict).
Functionality millionaires(uint32_t width);

// GF(2) affine-map equality check. chosen packs a dim-bit vector c in the
// low bits and a row-major dim x dim bit matrix M above it; target is a
// dim-bit vector t. output = 1 iff M*c = M*t (products reduced mod 2).
Functionality dual_execution_affine(uint32_t dim);

// output = floor((chosen + target) / 2), computed in width+1 bits.
Functionality mean_average(uint32_t width);

// The target contributes at bucket granularity: with its low log2(bucket)
// bits cleared, m = floor((chosen + target)/2) and output =
// floor(|chosen - m| / bucket_size). Targets in the same bucket are therefore
// indistinguishable for every chosen input. bucket_size must be a power of
// two; output_width = width - log2(bucket_size) (the quotient always fits,
// so saturation is vacuous).
Functionality bucketed_mean(uint32_t width, uint64_t bucket_size);

enum class WageVariant {
  kStandardDiv,  // chosen < floor((chosen + target)/2), division circuit
  kCircuitDiv,   // 2*chosen < chosen + target in width+1 bits
};

Functionality wage(uint32_t width, WageVariant variant);

// Double-auction market clearing price. Buyers and sellers each submit
// unit_bits units per price point; target concatenates the honest parties'
// schedules (buyers first), chosen the adversary parties'. demand(p) sums
// buyer units at prices >= p, supply(p) seller units at prices <= p. Output
// is the largest price index with demand >= supply, or 0 when none.
Functionality sugar_beets(uint32_t num_prices, uint32_t unit_bits,
                          uint32_t honest_buyers, uint32_t honest_sellers,
                          uint32_t adv_buyers, uint32_t adv_sellers);

// Checks the symbolic/concrete agreement invariant: exhaustively when
// chosen_width + target_width <= 16, else on 10^4 seeded random pairs.
// Throws CircuitError on any mismatch.
void validate_agreement(const Functionality& f, uint64_t seed = 0);

// Name + params lookup used by the CLI. Builtin names: and_gate,
// millionaires, mean_average, bucketed_mean, wage, dual_execution_affine,
// sugar_beets. User functionalities registered at runtime are validated on
// registration.
Functionality make_functionality(const std::string& name,
                                 const std::map<std::string, uint64_t>& params);
void register_functionality(const Functionality& f);
std::vector<std::string> functionality_names();

}  // namespace mcfil
