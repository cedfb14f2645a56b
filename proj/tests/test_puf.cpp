#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "pufsense/puf.hpp"

using namespace pufsense;

TEST_CASE("hamming weight formula") {
  auto hw = [](const char* s) {
    return hamming_weight_pct({BitVec::from_string(s), "t"});
  };
  CHECK(hw("11111111") == doctest::Approx(100.0));
  CHECK(hw("10110010") == doctest::Approx(50.0));
  CHECK(hw("10000000") == doctest::Approx(12.5));
  CHECK_THROWS(hamming_weight_pct({BitVec{}, "t"}));
}

TEST_CASE("hamming weight of complement sums to 100") {
  Rng rng(3);
  for (int i = 0; i < 20; i++) {
    BitVec v(64);
    for (size_t j = 0; j < 64; j++) v.set(j, rng.bernoulli(0.3));
    PufResponse r{v, "a"}, rc{v.complement(), "a"};
    CHECK(hamming_weight_pct(r) + hamming_weight_pct(rc) == doctest::Approx(100.0));
  }
}

TEST_CASE("hd_intra hand-evaluated") {
  PufResponse ref{BitVec::from_string("00000000"), "d"};
  std::vector<PufResponse> samples = {{BitVec::from_string("00000001"), "d"},
                                      {BitVec::from_string("00000111"), "d"}};
  auto [mean, mx] = hd_intra_pct(ref, samples);
  CHECK(mean == doctest::Approx(25.0));
  CHECK(mx == doctest::Approx(37.5));

  std::vector<PufResponse> same = {ref};
  auto [m2, x2] = hd_intra_pct(ref, same);
  CHECK(m2 == 0.0);
  CHECK(x2 == 0.0);

  std::vector<PufResponse> bad = {{BitVec::from_string("01"), "d"}};
  CHECK_THROWS(hd_intra_pct(ref, bad));
}

TEST_CASE("hd_inter hand-evaluated") {
  std::vector<PufResponse> comp = {{BitVec::from_string("1100"), "a"},
                                   {BitVec::from_string("0011"), "b"}};
  CHECK(hd_inter_pct(comp) == doctest::Approx(100.0));
  std::vector<PufResponse> half = {{BitVec::from_string("1100"), "a"},
                                   {BitVec::from_string("1010"), "b"}};
  CHECK(hd_inter_pct(half) == doctest::Approx(50.0));
  std::vector<PufResponse> copies = {{BitVec::from_string("1011"), "a"},
                                     {BitVec::from_string("1011"), "b"},
                                     {BitVec::from_string("1011"), "c"}};
  CHECK(hd_inter_pct(copies) == 0.0);
  std::vector<PufResponse> one = {{BitVec::from_string("1"), "a"}};
  CHECK_THROWS(hd_inter_pct(one));
}

TEST_CASE("sram: zero noise reproduces responses exactly") {
  SramParams p;
  p.num_cells = 256;
  p.bias = 0.5;
  p.mean_flip_rate = 0.0;
  p.rng_seed = 77;
  SramPuf puf(p);
  auto c = PufChallenge::sram_range(0, 256);
  CHECK(puf.sample(c, 0).bits == puf.sample(c, 1).bits);
  CHECK(puf.sample(c, 0).bits == puf.reference(c).bits);
}

TEST_CASE("sram: determinism per (seed, challenge, index)") {
  SramParams p = sram_profile_8bit(123);
  SramPuf puf(p);
  SramPuf puf2(p);
  auto c = PufChallenge::sram_range(16, 512);
  CHECK(puf.sample(c, 5).bits == puf2.sample(c, 5).bits);
  CHECK(puf.sample(c, 5).bits != puf.sample(c, 6).bits);
}

TEST_CASE("sram: out-of-range challenge rejected") {
  SramPuf puf(sram_profile_8bit(1));
  CHECK_THROWS(puf.sample(PufChallenge::sram_range(8000, 500), 0));
  CHECK_THROWS(puf.sample(PufChallenge::ro_pairs({0}), 0));
}

TEST_CASE("sram profile statistics: HW and HD_intra near configured rates") {
  SramParams p = sram_profile_8bit(2024);
  SramPuf puf(p);
  auto c = PufChallenge::sram_range(0, 1024);
  std::vector<PufResponse> samples;
  double hw_sum = 0;
  for (uint64_t i = 0; i < 100; i++) {
    samples.push_back(puf.sample(c, i));
    hw_sum += hamming_weight_pct(samples.back());
  }
  CHECK(hw_sum / 100.0 == doctest::Approx(63.5).epsilon(0.04));
  auto [mean, mx] = hd_intra_pct(puf.reference(c), samples);
  CHECK(mean == doctest::Approx(3.4).epsilon(0.3));
  CHECK(mx < 15.0);
  // convergence invariant: mean within +-1 point of the flip rate in %
  CHECK(std::abs(mean - 100.0 * p.mean_flip_rate) < 1.0);
}

TEST_CASE("ro: response length is 3x pair count") {
  RoPuf puf(ro_profile_fpga(5));
  auto r = puf.sample(PufChallenge::ro_sequential(1039), 0);
  CHECK(r.bits.size() == 3117);
  auto r2 = puf.sample(PufChallenge::ro_pairs({4, 9, 700}), 0);
  CHECK(r2.bits.size() == 9);
}

TEST_CASE("ro: zero jitter gives identical readouts") {
  RoParams p = ro_profile_fpga(9);
  p.freq_noise_sd = 0;
  RoPuf puf(p);
  auto c = PufChallenge::ro_pairs({0});
  CHECK(puf.sample(c, 0).bits == puf.sample(c, 1).bits);
  CHECK(puf.sample(c, 0).bits.size() == 3);
}

TEST_CASE("ro: identical frequencies resolved deterministically") {
  RoParams p;
  p.num_ros = 4;
  p.freq_process_sd = 0;  // all ROs identical
  p.freq_noise_sd = 0;
  p.rng_seed = 3;
  RoPuf puf(p);
  auto r = puf.sample(PufChallenge::ro_pairs({0, 1, 2}), 0);
  // ties: counter value pinned to all-ones, so extracted bits are 1
  CHECK(r.bits.to_string() == "111111111");
}

TEST_CASE("ro: pair index out of range rejected") {
  RoParams p;
  p.num_ros = 16;
  RoPuf puf(p);
  CHECK_THROWS(puf.sample(PufChallenge::ro_pairs({15}), 0));  // needs RO 16
  CHECK_NOTHROW(puf.sample(PufChallenge::ro_pairs({14}), 0));
}

TEST_CASE("ro: different devices decorrelate (HD_inter near 50%)") {
  std::vector<PufResponse> rs;
  for (uint64_t dev = 0; dev < 10; dev++) {
    RoPuf puf(ro_profile_fpga(31000 + dev));
    rs.push_back(puf.sample(PufChallenge::ro_sequential(1039), 0));
  }
  double inter = hd_inter_pct(rs);
  CHECK(inter > 47.0);
  CHECK(inter < 53.0);
}

TEST_CASE("challenge serialization round-trip") {
  for (const auto& c : {PufChallenge::sram_range(7, 99), PufChallenge::ro_pairs({1, 5, 1000}),
                        PufChallenge::ro_sequential(3)}) {
    auto enc = c.serialize();
    auto back = PufChallenge::deserialize(enc);
    REQUIRE(back.has_value());
    CHECK(*back == c);
  }
  CHECK(!PufChallenge::deserialize(Bytes{99}).has_value());
}

TEST_CASE("response dump format round-trip") {
  RoPuf puf(ro_profile_fpga(8));
  std::vector<PufResponse> rs;
  for (uint64_t i = 0; i < 3; i++) rs.push_back(puf.sample(PufChallenge::ro_sequential(10), i));
  std::stringstream ss;
  write_response_dump(ss, rs);
  auto back = read_response_dump(ss);
  REQUIRE(back.size() == 3);
  for (int i = 0; i < 3; i++) CHECK(back[i].bits == rs[i].bits);
}
