#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pufsense/fuzzy.hpp"

using namespace pufsense;

namespace {

PufResponse resp(const char* bits) { return {BitVec::from_string(bits), "dev"}; }

KeyMaterial random_key(Rng& rng, size_t len) {
  BitVec b(len);
  for (size_t i = 0; i < len; i++) b.set(i, rng.bernoulli(0.5));
  return {b};
}

}  // namespace

TEST_CASE("code-offset hand-run on the toy repetition code") {
  // key bit 1, r = 10110: C = 11111, W = r ^ C = 01001
  auto h = gen(resp("10110"), {BitVec::from_string("1")}, CodeParams::rep5(),
               PufChallenge::sram_range(0, 5));
  CHECK(h.w.to_string() == "01001");

  // r' = 10010 (one flip): C' = r' ^ W = 11011, majority -> 1
  auto k = rep(resp("10010"), h);
  REQUIRE(k.has_value());
  CHECK(k->bits.to_string() == "1");

  // three flips in the block exceed t=2: wrong key bit comes back
  auto k3 = rep(resp("01000"), h);  // r with bits 0,1,3 flipped
  REQUIRE(k3.has_value());
  CHECK(k3->bits.to_string() == "0");
}

TEST_CASE("all-zero key gives W = r for a systematic code") {
  PufResponse r = resp("1011001110");
  auto h = gen(r, {BitVec(2)}, CodeParams::rep5(), PufChallenge{});
  CHECK(h.w == r.bits);  // encode(0) = 0 for every linear code here
}

TEST_CASE("no noise reproduces the exact key for every code family") {
  Rng rng(31);
  for (auto code : {CodeParams::rep5(), CodeParams::rm_rep80(), CodeParams::bch492()}) {
    uint16_t key_len = 160;
    size_t need = num_blocks(key_len, code) * code.n;
    PufResponse r{BitVec(need), "dev"};
    for (size_t i = 0; i < need; i++) r.bits.set(i, rng.bernoulli(0.5));
    KeyMaterial key = random_key(rng, key_len);
    HelperData h = gen(r, key, code, PufChallenge{});
    auto back = rep(r, h);
    REQUIRE(back.has_value());
    CHECK(*back == key);
  }
}

TEST_CASE("helper data length is num_blocks * n") {
  Rng rng(32);
  auto code = CodeParams::bch492();
  // 160-bit key over k=57 -> 3 blocks -> 1476 bits of W
  CHECK(num_blocks(160, code) == 3);
  PufResponse r{BitVec(3 * 492), "dev"};
  for (size_t i = 0; i < r.bits.size(); i++) r.bits.set(i, rng.bernoulli(0.5));
  HelperData h = gen(r, random_key(rng, 160), code, PufChallenge{});
  CHECK(h.w.size() == 1476);
}

TEST_CASE("gen rejects short responses and empty keys") {
  Rng rng(33);
  CHECK_THROWS(gen(resp("1011"), {BitVec::from_string("1")}, CodeParams::rep5(), PufChallenge{}));
  CHECK_THROWS(gen(resp("10110"), {BitVec{}}, CodeParams::rep5(), PufChallenge{}));
}

TEST_CASE("round-trip under every <=t error pattern, exhaustive on rep5 blocks") {
  Rng rng(34);
  auto code = CodeParams::rep5();
  uint16_t key_len = 3;  // three blocks of one bit
  PufResponse r{BitVec(15), "dev"};
  for (size_t i = 0; i < 15; i++) r.bits.set(i, rng.bernoulli(0.5));
  for (int kv = 0; kv < 8; kv++) {
    BitVec kb(3);
    for (int j = 0; j < 3; j++) kb.set(j, (kv >> j) & 1);
    HelperData h = gen(r, {kb}, code, PufChallenge{});
    // per-block error masks of weight <= 2 (16 each), applied to all blocks
    for (int m0 = 0; m0 < 32; m0++) {
      if (__builtin_popcount(m0) > 2) continue;
      for (int m1 = 0; m1 < 32; m1 += 7) {          // subsample the cross product
        if (__builtin_popcount(m1 % 32) > 2) continue;
        PufResponse noisy = r;
        for (int b = 0; b < 5; b++) {
          if ((m0 >> b) & 1) noisy.bits.flip(b);
          if ((m1 >> b) & 1) noisy.bits.flip(5 + b);
        }
        auto back = rep(noisy, h);
        REQUIRE(back.has_value());
        CHECK(back->bits == kb);
      }
    }
  }
}

TEST_CASE("gen and rep are deterministic") {
  Rng rng(35);
  auto code = CodeParams::rm_rep80();
  PufResponse r{BitVec(2 * 80), "dev"};
  for (size_t i = 0; i < r.bits.size(); i++) r.bits.set(i, rng.bernoulli(0.5));
  KeyMaterial key = random_key(rng, 10);
  auto h1 = gen(r, key, code, PufChallenge{});
  auto h2 = gen(r, key, code, PufChallenge{});
  CHECK(h1 == h2);
  CHECK(rep(r, h1) == rep(r, h2));
}

TEST_CASE("size and gate accounting reproduces the reference table") {
  auto bch = CodeParams::bch492();
  auto rm = CodeParams::rm_rep80();
  CHECK(hda_footprint(bch, 128).helper_bits == 1105);
  CHECK(hda_footprint(bch, 128).logic_gates == 1108);
  CHECK(hda_footprint(bch, 160).helper_bits == 1381);
  CHECK(hda_footprint(bch, 160).logic_gates == 1384);
  CHECK(hda_footprint(rm, 128).helper_bits == 2048);
  CHECK(hda_footprint(rm, 128).logic_gates == 2051);
  CHECK(hda_footprint(rm, 160).helper_bits == 2560);
  CHECK(hda_footprint(rm, 160).logic_gates == 2563);
  CHECK_THROWS(hda_footprint(bch, 0));
}

TEST_CASE("failure-rate harness: endpoints") {
  RoPuf model(ro_profile_fpga(99));
  auto challenge = PufChallenge::ro_sequential(1039);
  auto zero = failure_rate_trial(model, challenge, CodeParams::rm_rep80(), 160, 0.0, 50, 1);
  CHECK(zero.failures == 0);
  auto half = failure_rate_trial(model, challenge, CodeParams::rm_rep80(), 160, 0.5, 50, 2);
  CHECK(half.failure_fraction > 0.9);
}

TEST_CASE("failure-rate harness: 10% flips on both realizations (small run)") {
  SramPuf model(sram_profile_8bit(4));
  auto challenge = PufChallenge::sram_range(0, 2560);  // covers both realizations
  auto bch = failure_rate_trial(model, challenge, CodeParams::bch492(), 160, 0.10, 200, 3);
  CHECK(bch.failures == 0);
  auto rm = failure_rate_trial(model, challenge, CodeParams::rm_rep80(), 160, 0.10, 200, 4);
  CHECK(rm.failures == 0);
}

TEST_CASE("helper file round-trip and integrity") {
  Rng rng(36);
  Bytes storage_key = {1, 2, 3, 4};
  auto code = CodeParams::rm_rep80();
  PufResponse r{BitVec(32 * 80), "dev"};
  for (size_t i = 0; i < r.bits.size(); i++) r.bits.set(i, rng.bernoulli(0.5));
  HelperData h = gen(r, random_key(rng, 160), code, PufChallenge::sram_range(0, 2560));

  Bytes file = serialize_helper(h, storage_key);
  auto back = parse_helper(file, storage_key);
  REQUIRE(back.has_value());
  CHECK(*back == h);

  // flipped byte -> MAC rejects
  Bytes bad = file;
  bad[10] ^= 0x40;
  CHECK(!parse_helper(bad, storage_key).has_value());
  // wrong storage key -> rejects
  Bytes other_key = {9, 9};
  CHECK(!parse_helper(file, other_key).has_value());
  // truncation -> rejects
  Bytes shorter(file.begin(), file.end() - 1);
  CHECK(!parse_helper(shorter, storage_key).has_value());
}
