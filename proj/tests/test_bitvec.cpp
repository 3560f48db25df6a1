#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdint>

#include "doctest.h"
#include "mcfil/bitvec.hpp"
#include "mcfil/errors.hpp"
#include "mcfil/rng.hpp"

using namespace mcfil;

TEST_CASE("construction and value round-trip") {
  CHECK(BitVec(8, 0).to_u64() == 0);
  CHECK(BitVec(8, 255).to_u64() == 255);
  CHECK(BitVec(1, 1).to_u64() == 1);
  CHECK(BitVec(64, UINT64_MAX).to_u64() == UINT64_MAX);
  // Values wrap into the declared width.
  CHECK(BitVec(4, 0x1f).to_u64() == 0xf);
}

TEST_CASE("bit access") {
  BitVec v(8, 0b10110010);
  CHECK(v.bit(1));
  CHECK_FALSE(v.bit(0));
  CHECK(v.bit(7));
  v.set_bit(0, true);
  CHECK(v.to_u64() == 0b10110011);
  v.set_bit(7, false);
  CHECK(v.to_u64() == 0b00110011);
}

TEST_CASE("hex round-trip at fixed digit count") {
  CHECK(BitVec(8, 0x4d).to_hex() == "4d");
  CHECK(BitVec(12, 0x4d).to_hex() == "04d");
  CHECK(BitVec(1, 0).to_hex() == "0");
  CHECK(BitVec::from_hex(8, "4d").to_u64() == 0x4d);
  CHECK(BitVec::from_hex(8, "4D").to_u64() == 0x4d);
  CHECK_THROWS_AS(BitVec::from_hex(4, "ff"), Error);
  for (uint64_t v = 0; v < 256; v++) {
    BitVec b(8, v);
    CHECK(BitVec::from_hex(8, b.to_hex()) == b);
  }
}

TEST_CASE("modular arithmetic agrees with plain integers") {
  RngStream rng(7, "test.bitvec", 0);
  for (int i = 0; i < 1000; i++) {
    uint32_t w = 1 + static_cast<uint32_t>(rng.below(64));
    uint64_t mask = w == 64 ? UINT64_MAX : (uint64_t{1} << w) - 1;
    uint64_t a = rng.next_u64() & mask, b = rng.next_u64() & mask;
    BitVec va(w, a), vb(w, b);
    CHECK(va.add(vb).to_u64() == ((a + b) & mask));
    CHECK(va.sub(vb).to_u64() == ((a - b) & mask));
    CHECK(va.mult(vb).to_u64() == ((a * b) & mask));
    CHECK(va.udiv(vb).to_u64() == (b == 0 ? mask : a / b));
    CHECK(va.band(vb).to_u64() == (a & b));
    CHECK(va.bor(vb).to_u64() == (a | b));
    CHECK(va.bxor(vb).to_u64() == (a ^ b));
    CHECK(va.bnot().to_u64() == (~a & mask));
    CHECK(va.ult(vb) == (a < b));
    CHECK(va.ugt(vb) == (a > b));
    CHECK((va == vb) == (a == b));
  }
}

TEST_CASE("extract and concat") {
  BitVec v(4, 0b1011);
  CHECK(v.extract(2, 1).to_u64() == 0b01);
  CHECK(v.extract(3, 0) == v);
  CHECK(v.extract(0, 0).to_u64() == 1);
  BitVec hi(4, 0xa), lo(4, 0x5);
  CHECK(hi.concat(lo).to_u64() == 0xa5);
  CHECK(hi.concat(lo).width() == 8);
  CHECK(BitVec(4, 0xb).zext(8).to_u64() == 0x0b);
}

TEST_CASE("wide vectors past one limb") {
  BitVec v(130);
  v.set_bit(129, true);
  v.set_bit(0, true);
  CHECK(v.bit(129));
  CHECK(v.extract(129, 129).to_u64() == 1);
  CHECK(v.extract(128, 1).is_zero());
  BitVec ones = BitVec::all_ones(130);
  CHECK(ones.bit(129));
  CHECK(ones.add(BitVec(130, 1)).is_zero());
  CHECK(ones.to_hex().size() == (130 + 3) / 4);
  CHECK(BitVec::from_hex(130, ones.to_hex()) == ones);
}

TEST_CASE("total order is width-major then value") {
  CHECK(BitVec(4, 9) < BitVec(8, 1));
  CHECK(BitVec(8, 1) < BitVec(8, 2));
  CHECK_FALSE(BitVec(8, 2) < BitVec(8, 2));
}
