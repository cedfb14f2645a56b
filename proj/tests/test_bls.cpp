#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pufsense/bls.hpp"

using namespace pufsense;
using bn254::Fr;
using bn254::G1;
using bn254::G2;

TEST_CASE("sign/verify completeness and forgery rejection") {
  Rng rng(41);
  Fr sk = bn254::random_fr(rng);
  G2 pk = G2::generator() * sk;
  auto msg = as_bytes("temperature=21.5C");

  Signature sig = bls_sign(TAG_MSG, sk, msg);
  CHECK(bls_verify(TAG_MSG, pk, msg, sig));
  CHECK(!bls_verify(TAG_MSG, pk, as_bytes("temperature=99.9C"), sig));

  Fr sk2 = bn254::random_fr(rng);
  CHECK(!bls_verify(TAG_MSG, G2::generator() * sk2, msg, sig));
  // wrong domain tag
  CHECK(!bls_verify(TAG_CERT, pk, msg, sig));
  // tampered signature
  Signature bad{sig.sigma + G1::generator()};
  CHECK(!bls_verify(TAG_MSG, pk, msg, bad));
}

TEST_CASE("signing is deterministic") {
  Rng rng(42);
  Fr sk = bn254::random_fr(rng);
  auto msg = as_bytes("m");
  CHECK(bls_sign(TAG_MSG, sk, msg).serialize() == bls_sign(TAG_MSG, sk, msg).serialize());
}

TEST_CASE("aggregate of one signature is that signature") {
  Rng rng(43);
  Fr sk = bn254::random_fr(rng);
  Signature sig = bls_sign(TAG_MSG, sk, as_bytes("only"));
  auto agg = bls_aggregate(std::vector<Signature>{sig});
  CHECK(agg.sigma.eq(sig.sigma));
  CHECK_THROWS(bls_aggregate({}));
}

TEST_CASE("aggregate verification equals the conjunction of individual checks") {
  Rng rng(44);
  // all-valid plus exhaustive single-corruption sweeps for Q = 1..5
  for (size_t q = 1; q <= 5; q++) {
    std::vector<Fr> sks;
    std::vector<AggregationEntry> entries;
    std::vector<Signature> sigs;
    for (size_t i = 0; i < q; i++) {
      Fr sk = bn254::random_fr(rng);
      sks.push_back(sk);
      AggregationEntry e;
      e.tag = std::string(TAG_MSG);
      e.msg = Bytes{uint8_t('a' + i), uint8_t(q)};
      e.pk = G2::generator() * sk;
      sigs.push_back(bls_sign(e.tag, sk, e.msg));
      entries.push_back(std::move(e));
    }
    CHECK(bls_aggregate_verify(entries, bls_aggregate(sigs)));

    for (size_t corrupt = 0; corrupt < q; corrupt++) {
      auto bad_sigs = sigs;
      bad_sigs[corrupt].sigma = bad_sigs[corrupt].sigma + G1::generator();
      bool individual_all = true;
      for (size_t i = 0; i < q; i++)
        individual_all &= bls_verify(entries[i].tag, entries[i].pk, entries[i].msg, bad_sigs[i]);
      CHECK(!individual_all);
      CHECK(!bls_aggregate_verify(entries, bls_aggregate(bad_sigs)));
    }
  }
}

TEST_CASE("duplicate message under the same key is rejected as an error") {
  Rng rng(45);
  Fr sk = bn254::random_fr(rng);
  AggregationEntry e;
  e.tag = std::string(TAG_MSG);
  e.msg = Bytes{1, 2, 3};
  e.pk = G2::generator() * sk;
  Signature sig = bls_sign(e.tag, sk, e.msg);
  std::vector<AggregationEntry> entries{e, e};
  auto agg = bls_aggregate(std::vector<Signature>{sig, sig});
  CHECK_THROWS(bls_aggregate_verify(entries, agg));
  // same message under a different key is fine
  Fr sk2 = bn254::random_fr(rng);
  entries[1].pk = G2::generator() * sk2;
  auto agg2 = bls_aggregate(std::vector<Signature>{sig, bls_sign(e.tag, sk2, e.msg)});
  CHECK(bls_aggregate_verify(entries, agg2));
}

TEST_CASE("enroll/extract round-trip: recovered scalar matches the public key") {
  Rng rng(46);
  MasterKeys master = certibs_setup(rng);
  SramPuf puf(sram_profile_8bit(7));
  auto challenge = PufChallenge::sram_range(0, 3 * 492);
  auto identity = as_bytes("sensor-0001");

  EnrollmentRecord rec = certibs_enroll(rng, master, identity, puf.reference(challenge),
                                        CodeParams::bch492(), challenge);
  // device side: noisy re-reading, then key extraction
  auto extracted = rep(puf.sample(challenge, 900), rec.helper);
  REQUIRE(extracted.has_value());
  Fr sk = scalar_from_key(*extracted);
  CHECK((G2::generator() * sk).eq(rec.pk));

  // certificate verifies under the master public key
  CHECK(bls_verify(TAG_CERT, master.mpk, cert_message(identity, rec.pk), rec.cert.sig));
}

TEST_CASE("two enrollments yield distinct identities, keys and helpers") {
  Rng rng(47);
  MasterKeys master = certibs_setup(rng);
  SramPuf puf_a(sram_profile_8bit(100));
  SramPuf puf_b(sram_profile_8bit(101));
  auto challenge = PufChallenge::sram_range(0, 3 * 492);
  auto rec_a = certibs_enroll(rng, master, as_bytes("sensor-a"), puf_a.reference(challenge),
                              CodeParams::bch492(), challenge);
  auto rec_b = certibs_enroll(rng, master, as_bytes("sensor-b"), puf_b.reference(challenge),
                              CodeParams::bch492(), challenge);
  CHECK(rec_a.identity != rec_b.identity);
  CHECK(!rec_a.pk.eq(rec_b.pk));
  CHECK(rec_a.helper.w != rec_b.helper.w);
}

TEST_CASE("attest then verify, flipped payload bit fails") {
  Rng rng(48);
  MasterKeys master = certibs_setup(rng);
  SramPuf puf(sram_profile_8bit(8));
  auto challenge = PufChallenge::sram_range(0, 3 * 492);
  auto identity = as_bytes("cam-7");
  auto rec = certibs_enroll(rng, master, identity, puf.reference(challenge),
                            CodeParams::bch492(), challenge);
  auto key = rep(puf.sample(challenge, 1), rec.helper);
  REQUIRE(key.has_value());
  Fr sk = scalar_from_key(*key);

  FreshnessTag tau{1, 1723200000};
  AttestedReading reading =
      certibs_attest(sk, identity, rec.pk, rec.cert, as_bytes("frame-checksum"), tau);
  CHECK(certibs_verify(master.mpk, reading));

  AttestedReading tampered = reading;
  tampered.payload[0] ^= 1;
  CHECK(!certibs_verify(master.mpk, tampered));

  // certificate from another key pair fails
  AttestedReading swapped = reading;
  Fr other = bn254::random_fr(rng);
  swapped.cert.sig = bls_sign(TAG_CERT, other, cert_message(identity, rec.pk));
  CHECK(!certibs_verify(master.mpk, swapped));

  // reading serialization round-trip
  auto enc = reading.serialize();
  auto back = AttestedReading::deserialize(enc);
  REQUIRE(back.has_value());
  CHECK(certibs_verify(master.mpk, *back));
  CHECK(back->tau == tau);
}

TEST_CASE("serialized element sizes match the declared group config widths") {
  Rng rng(49);
  GroupConfig cfg = GroupConfig::bn254();
  Fr sk = bn254::random_fr(rng);
  G1 p = G1::generator() * sk;
  G2 q = G2::generator() * sk;
  CHECK(p.serialize().size() * 8 == cfg.widths.g1_bits);
  CHECK(q.serialize().size() * 8 == cfg.widths.g2_bits);
  CHECK(bn254::pairing(p, q).to_bytes().size() * 8 == cfg.widths.gt_bits);
  CHECK(sk.to_bytes().size() * 8 == cfg.widths.zp_bits);
}

TEST_CASE("setup twice yields distinct master keys, same structure") {
  Rng rng_a(50), rng_b(51);
  MasterKeys a = certibs_setup(rng_a);
  MasterKeys b = certibs_setup(rng_b);
  CHECK(!a.mpk.eq(b.mpk));
  CHECK(a.mpk.on_curve());
  CHECK(b.mpk.on_curve());
}
