#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pufsense/bits.hpp"
#include "pufsense/crypto_util.hpp"
#include "pufsense/rng.hpp"

using namespace pufsense;

TEST_CASE("bitvec basics") {
  BitVec v = BitVec::from_string("10110010");
  CHECK(v.size() == 8);
  CHECK(v.count_ones() == 4);
  CHECK(v.to_string() == "10110010");
  CHECK(v.complement().to_string() == "01001101");
  CHECK(BitVec::hamming(v, v.complement()) == 8);
  CHECK((v ^ v).count_ones() == 0);
}

TEST_CASE("bitvec packing round-trip") {
  Rng rng(1);
  for (size_t len : {1u, 7u, 8u, 9u, 100u, 492u}) {
    BitVec v(len);
    for (size_t i = 0; i < len; i++) v.set(i, rng.bernoulli(0.5));
    auto packed = v.packed();
    CHECK(packed.size() == (len + 7) / 8);
    CHECK(BitVec::from_packed(packed, len) == v);
  }
}

TEST_CASE("bitvec slicing and append") {
  BitVec v = BitVec::from_string("110010");
  BitVec s = v.slice(2, 3);
  CHECK(s.to_string() == "001");
  BitVec w = s;
  w.append(BitVec::from_string("11"));
  CHECK(w.to_string() == "00111");
  CHECK_THROWS(v.slice(4, 4));
}

TEST_CASE("hex helpers") {
  Bytes b = {0xde, 0xad, 0x01};
  CHECK(to_hex(b) == "dead01");
  CHECK(from_hex("dead01") == b);
  CHECK_THROWS(from_hex("xz"));
}

TEST_CASE("sha256 known vector") {
  // SHA256("abc")
  auto d = sha256(as_bytes("abc"));
  CHECK(to_hex(d) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("hmac-sha256 known vector") {
  // RFC 4231 test case 2
  auto d = hmac_sha256(as_bytes("Jefe"), as_bytes("what do ya want for nothing?"));
  CHECK(to_hex(d) == "5bdcc146bf60754e6a042426089575c75a003f089d2739839dec58b964ec3843");
}

TEST_CASE("aes-ctr symmetric round-trip") {
  Bytes key(16, 0x11);
  std::array<uint8_t, 16> iv{};
  iv[0] = 0x42;
  Bytes msg = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  Bytes ct = aes_ctr(key, iv, msg);
  CHECK(ct != msg);
  CHECK(aes_ctr(key, iv, ct) == msg);
}

TEST_CASE("byte writer/reader round-trip") {
  ByteWriter w;
  w.u8(7);
  w.u16(513);
  w.u32(70000);
  w.u64(1ull << 40);
  w.str("hi");
  ByteReader r{w.buf};
  CHECK(r.u8() == 7);
  CHECK(r.u16() == 513);
  CHECK(r.u32() == 70000);
  CHECK(r.u64() == (1ull << 40));
  CHECK(r.take(2) == Bytes{'h', 'i'});
  CHECK(r.done());
  CHECK(r.u8() == 0);
  CHECK(r.fail);
}
