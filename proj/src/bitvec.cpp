#include "mcfil/bitvec.hpp"

#include <algorithm>
#include <cstdio>

#include "mcfil/errors.hpp"

namespace mcfil {

namespace {

void check_width(uint32_t width) {
  if (width > kMaxWidth) {
    throw CircuitError("bit width " + std::to_string(width) + " exceeds " +
                       std::to_string(kMaxWidth));
  }
}

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

BitVec::BitVec(uint32_t width) : width_(width) {
  check_width(width);
  words_.assign(word_count(), 0);
}

BitVec::BitVec(uint32_t width, uint64_t value) : BitVec(width) {
  if (!words_.empty()) {
    words_[0] = value;
    trim();
  }
}

void BitVec::trim() {
  uint32_t rem = width_ % 64;
  if (rem != 0) words_.back() &= (uint64_t{1} << rem) - 1;
}

BitVec BitVec::from_hex(uint32_t width, std::string_view hex) {
  check_width(width);
  if (hex.empty()) throw CircuitError("empty hex string");
  BitVec r(width);
  uint32_t bit_pos = 0;
  for (size_t i = hex.size(); i-- > 0;) {
    int d = hex_digit(hex[i]);
    if (d < 0) {
      throw CircuitError("invalid hex character in \"" + std::string(hex) +
                         "\"");
    }
    for (int b = 0; b < 4; b++) {
      if ((d >> b) & 1) {
        if (bit_pos + b >= width) {
          throw CircuitError("hex value \"" + std::string(hex) +
                             "\" does not fit in " + std::to_string(width) +
                             " bits");
        }
        r.set_bit(bit_pos + b, true);
      }
    }
    bit_pos += 4;
  }
  return r;
}

bool BitVec::bit(uint32_t i) const {
  return i < width_ && ((words_[i / 64] >> (i % 64)) & 1) != 0;
}

void BitVec::set_bit(uint32_t i, bool v) {
  if (i >= width_) throw CircuitError("bit index out of range");
  uint64_t mask = uint64_t{1} << (i % 64);
  if (v) {
    words_[i / 64] |= mask;
  } else {
    words_[i / 64] &= ~mask;
  }
}

uint64_t BitVec::to_u64() const {
  if (width_ > 64) {
    for (size_t i = 1; i < words_.size(); i++) {
      if (words_[i] != 0) throw CircuitError("value does not fit in 64 bits");
    }
  }
  return words_[0];
}

std::string BitVec::to_hex() const {
  uint32_t digits = (width_ + 3) / 4;
  std::string s(digits, '0');
  for (uint32_t d = 0; d < digits; d++) {
    uint32_t v = 0;
    for (uint32_t b = 0; b < 4; b++) {
      if (bit(d * 4 + b)) v |= 1u << b;
    }
    s[digits - 1 - d] = "0123456789abcdef"[v];
  }
  return s;
}

std::string BitVec::to_string() const {
  if (width_ <= 64) return std::to_string(words_[0]);
  return to_hex();
}

BitVec BitVec::add(const BitVec& o) const {
  if (o.width_ != width_) throw CircuitError("ADD width mismatch");
  BitVec r(width_);
  uint64_t carry = 0;
  for (size_t i = 0; i < words_.size(); i++) {
    uint64_t a = words_[i], b = o.words_[i];
    uint64_t s = a + b;
    uint64_t c1 = s < a;
    uint64_t s2 = s + carry;
    uint64_t c2 = s2 < s;
    r.words_[i] = s2;
    carry = c1 | c2;
  }
  r.trim();
  return r;
}

BitVec BitVec::sub(const BitVec& o) const {
  if (o.width_ != width_) throw CircuitError("SUB width mismatch");
  return add(o.bnot().add(BitVec(width_, 1)));
}

BitVec BitVec::mult(const BitVec& o) const {
  if (o.width_ != width_) throw CircuitError("MULT width mismatch");
  BitVec acc(width_);
  BitVec shifted = *this;
  for (uint32_t i = 0; i < width_; i++) {
    if (o.bit(i)) acc = acc.add(shifted);
    // shift left by one
    BitVec next(width_);
    for (uint32_t b = width_ - 1; b >= 1; b--) next.set_bit(b, shifted.bit(b - 1));
    shifted = next;
  }
  return acc;
}

BitVec BitVec::udiv(const BitVec& o) const {
  if (o.width_ != width_) throw CircuitError("UDIV width mismatch");
  if (o.is_zero()) return all_ones(width_);
  // Schoolbook restoring division, MSB first.
  BitVec q(width_);
  BitVec rem(width_);
  for (uint32_t i = width_; i-- > 0;) {
    // rem = (rem << 1) | bit(i)
    BitVec next(width_);
    for (uint32_t b = width_ - 1; b >= 1; b--) next.set_bit(b, rem.bit(b - 1));
    next.set_bit(0, bit(i));
    rem = next;
    if (!rem.ult(o)) {
      rem = rem.sub(o);
      q.set_bit(i, true);
    }
  }
  return q;
}

BitVec BitVec::band(const BitVec& o) const {
  if (o.width_ != width_) throw CircuitError("AND width mismatch");
  BitVec r(width_);
  for (size_t i = 0; i < words_.size(); i++) r.words_[i] = words_[i] & o.words_[i];
  return r;
}

BitVec BitVec::bor(const BitVec& o) const {
  if (o.width_ != width_) throw CircuitError("OR width mismatch");
  BitVec r(width_);
  for (size_t i = 0; i < words_.size(); i++) r.words_[i] = words_[i] | o.words_[i];
  return r;
}

BitVec BitVec::bxor(const BitVec& o) const {
  if (o.width_ != width_) throw CircuitError("XOR width mismatch");
  BitVec r(width_);
  for (size_t i = 0; i < words_.size(); i++) r.words_[i] = words_[i] ^ o.words_[i];
  return r;
}

BitVec BitVec::bnot() const {
  BitVec r(width_);
  for (size_t i = 0; i < words_.size(); i++) r.words_[i] = ~words_[i];
  r.trim();
  return r;
}

bool BitVec::ult(const BitVec& o) const {
  if (o.width_ != width_) throw CircuitError("ULT width mismatch");
  for (size_t i = words_.size(); i-- > 0;) {
    if (words_[i] != o.words_[i]) return words_[i] < o.words_[i];
  }
  return false;
}

BitVec BitVec::extract(uint32_t hi, uint32_t lo) const {
  if (lo > hi || hi >= width_) {
    throw CircuitError("EXTRACT range [" + std::to_string(hi) + ":" +
                       std::to_string(lo) + "] invalid for width " +
                       std::to_string(width_));
  }
  BitVec r(hi - lo + 1);
  for (uint32_t i = 0; i < r.width_; i++) r.set_bit(i, bit(lo + i));
  return r;
}

BitVec BitVec::concat(const BitVec& low) const {
  uint32_t w = width_ + low.width_;
  check_width(w);
  BitVec r(w);
  for (uint32_t i = 0; i < low.width_; i++) r.set_bit(i, low.bit(i));
  for (uint32_t i = 0; i < width_; i++) r.set_bit(low.width_ + i, bit(i));
  return r;
}

BitVec BitVec::zext(uint32_t new_width) const {
  if (new_width <= width_) throw CircuitError("zext target width too small");
  BitVec r(new_width);
  for (uint32_t i = 0; i < width_; i++) r.set_bit(i, bit(i));
  return r;
}

bool BitVec::is_zero() const {
  for (uint64_t w : words_) {
    if (w != 0) return false;
  }
  return true;
}

BitVec BitVec::all_ones(uint32_t width) {
  BitVec r(width);
  for (auto& w : r.words_) w = ~uint64_t{0};
  r.trim();
  return r;
}

bool BitVec::operator==(const BitVec& o) const {
  return width_ == o.width_ && words_ == o.words_;
}

bool BitVec::operator<(const BitVec& o) const {
  if (width_ != o.width_) return width_ < o.width_;
  for (size_t i = words_.size(); i-- > 0;) {
    if (words_[i] != o.words_[i]) return words_[i] < o.words_[i];
  }
  return false;
}

}  // namespace mcfil
