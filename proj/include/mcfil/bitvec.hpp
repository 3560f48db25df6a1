#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mcfil {

// Hard upper bound on any bit-vector width in the system.
inline constexpr uint32_t kMaxWidth = 256;

// Fixed-width unsigned integer with wrap-around arithmetic, stored as
// little-endian 64-bit limbs. Bit 0 is the least significant bit. All binary
// operations require equal widths and reduce results mod 2^width.
class BitVec {
 public:
  BitVec() : width_(1), words_(1, 0) {}
  explicit BitVec(uint32_t width);
  BitVec(uint32_t width, uint64_t value);

  // Parses a lowercase/uppercase hex string (no 0x prefix). Rejects strings
  // whose value does not fit in `width` bits.
  static BitVec from_hex(uint32_t width, std::string_view hex);

  uint32_t width() const { return width_; }
  bool bit(uint32_t i) const;
  void set_bit(uint32_t i, bool v);

  // Value as uint64; requires width <= 64.
  uint64_t to_u64() const;
  // Lowercase hex, fixed length ceil(width/4) digits, no prefix.
  std::string to_hex() const;
  std::string to_string() const;  // decimal when width <= 64, else hex

  BitVec add(const BitVec& o) const;
  BitVec sub(const BitVec& o) const;
  BitVec mult(const BitVec& o) const;
  // Unsigned division; division by zero yields the all-ones vector.
  BitVec udiv(const BitVec& o) const;
  BitVec band(const BitVec& o) const;
  BitVec bor(const BitVec& o) const;
  BitVec bxor(const BitVec& o) const;
  BitVec bnot() const;

  bool ult(const BitVec& o) const;
  bool ugt(const BitVec& o) const { return o.ult(*this); }

  // Bits [lo, hi] inclusive as a new vector of width hi-lo+1.
  BitVec extract(uint32_t hi, uint32_t lo) const;
  // `*this` supplies the high bits, `low` the low bits.
  BitVec concat(const BitVec& low) const;
  // Zero-extends to a strictly larger width.
  BitVec zext(uint32_t new_width) const;

  bool is_zero() const;
  static BitVec all_ones(uint32_t width);

  bool operator==(const BitVec& o) const;
  bool operator!=(const BitVec& o) const { return !(*this == o); }
  // Total order: width-major, then unsigned value. Usable as a map key.
  bool operator<(const BitVec& o) const;

 private:
  void trim();
  uint32_t word_count() const { return (width_ + 63) / 64; }

  uint32_t width_;
  std::vector<uint64_t> words_;
};

}  // namespace mcfil
