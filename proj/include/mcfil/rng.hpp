#pragma once

#include <cstdint>
#include <string_view>

namespace mcfil {

// Deterministic random stream derived from (master seed, purpose tag, call
// index). Every randomized component draws from its own stream, so results
// do not depend on scheduling or evaluation order. splitmix64 underneath;
// no libc or libstdc++ distributions, to keep traces byte-stable.
class RngStream {
 public:
  RngStream(uint64_t master_seed, std::string_view purpose,
            uint64_t call_index);

  uint64_t next_u64();
  bool next_bit() { return (next_u64() >> 63) != 0; }
  // Uniform in [0, n), n >= 1. Rejection sampling, no modulo bias.
  uint64_t below(uint64_t n);
  double next_unit();  // [0, 1)

 private:
  uint64_t state_;
};

}  // namespace mcfil
