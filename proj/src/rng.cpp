#include "mcfil/rng.hpp"

namespace mcfil {

namespace {

uint64_t splitmix64(uint64_t& s) {
  uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

uint64_t fnv1a(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

RngStream::RngStream(uint64_t master_seed, std::string_view purpose,
                     uint64_t call_index) {
  uint64_t s = master_seed;
  uint64_t a = splitmix64(s);
  s ^= fnv1a(purpose);
  uint64_t b = splitmix64(s);
  s ^= call_index * 0x9e3779b97f4a7c15ULL;
  uint64_t c = splitmix64(s);
  state_ = a ^ (b * 0xff51afd7ed558ccdULL) ^ (c << 1);
  // avoid the all-zero fixed point of a lazy caller mixing to zero
  if (state_ == 0) state_ = 0x2545f4914f6cdd1dULL;
}

uint64_t RngStream::next_u64() { return splitmix64(state_); }

uint64_t RngStream::below(uint64_t n) {
  if (n <= 1) return 0;
  uint64_t limit = ~uint64_t{0} - (~uint64_t{0} % n);
  uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return v % n;
}

double RngStream::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

}  // namespace mcfil
