#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "pufsense/roles.hpp"

using namespace pufsense;
using namespace pufsense::roles;

namespace {

struct Deployment {
  TaState ta;
  std::vector<Sensor> sensors;
};

Deployment make_deployment(uint64_t seed, size_t num_sensors) {
  Rng rng(seed);
  Deployment d{ta_setup(rng), {}};
  auto challenge = PufChallenge::sram_range(0, 3 * 492);
  for (size_t i = 0; i < num_sensors; i++) {
    SramPuf puf(sram_profile_8bit(seed * 100 + i));
    std::string id = "sensor-" + std::to_string(i);
    Rng enroll_rng = rng.child(id);
    auto rec = certibs_enroll(enroll_rng, d.ta.master, as_bytes(id), puf.reference(challenge),
                              CodeParams::bch492(), challenge);
    d.sensors.emplace_back(std::move(puf), challenge, std::move(rec));
  }
  return d;
}

}  // namespace

TEST_CASE("message framing round-trip") {
  Bytes payload = {1, 2, 3};
  Bytes framed = frame_message(MsgType::report, payload);
  CHECK(framed.size() == 4 + 1 + 3);
  auto parsed = parse_message(framed);
  REQUIRE(parsed.has_value());
  CHECK(parsed->first == MsgType::report);
  CHECK(parsed->second == payload);
  framed[3] ^= 1;  // length corrupted
  CHECK(!parse_message(framed).has_value());
}

TEST_CASE("ta setup: distinct master keys, publishable bundle round-trips") {
  Rng a(81), b(82);
  TaState ta1 = ta_setup(a);
  TaState ta2 = ta_setup(b);
  CHECK(!ta1.master.mpk.eq(ta2.master.mpk));
  Bytes enc = ta1.public_bundle().serialize();
  auto back = SetupBundle::deserialize(enc);
  REQUIRE(back.has_value());
  CHECK(back->mpk.eq(ta1.master.mpk));
  CHECK(back->serialize() == enc);
}

TEST_CASE("happy path: Q=1 and Q=2 reports accepted at the server") {
  auto d = make_deployment(83, 2);
  Rng host_rng(84);
  ServerState server(d.ta.crs, d.ta.master.mpk);

  std::vector<AttestedReading> one = {d.sensors[0].attest(as_bytes("img:0001"), 1000)};
  auto bundle1 = host_aggregate_and_prove(one, d.ta.crs, d.ta.master.mpk, host_rng);
  CHECK(server.verify(bundle1).accepted);

  std::vector<AttestedReading> two = {d.sensors[0].attest(as_bytes("img:0002"), 1001),
                                      d.sensors[1].attest(as_bytes("gps:48.2,16.3"), 1001)};
  auto bundle2 = host_aggregate_and_prove(two, d.ta.crs, d.ta.master.mpk, host_rng);
  CHECK(server.verify(bundle2).accepted);
  CHECK(server.accepted_count() == 2);
}

TEST_CASE("server verification equals the conjunction of individual checks (Q <= 4)") {
  auto d = make_deployment(85, 4);
  Rng host_rng(86);
  for (size_t q = 1; q <= 4; q++) {
    std::vector<AttestedReading> readings;
    for (size_t i = 0; i < q; i++)
      readings.push_back(d.sensors[i].attest(Bytes{uint8_t(q), uint8_t(i)}, 2000 + q));
    bool all_valid = std::all_of(readings.begin(), readings.end(), [&](const auto& r) {
      return certibs_verify(d.ta.master.mpk, r);
    });
    CHECK(all_valid);
    ServerState server(d.ta.crs, d.ta.master.mpk);
    auto bundle = host_aggregate_and_prove(readings, d.ta.crs, d.ta.master.mpk, host_rng);
    CHECK(server.verify(bundle).accepted);

    // tamper one payload after attestation: individual check fails and the
    // host refuses to build the report
    auto bad = readings;
    bad[q - 1].payload.push_back(0xff);
    CHECK(!certibs_verify(d.ta.master.mpk, bad[q - 1]));
    CHECK_THROWS(host_aggregate_and_prove(bad, d.ta.crs, d.ta.master.mpk, host_rng));
  }
}

TEST_CASE("replay: the same bundle is rejected the second time") {
  auto d = make_deployment(87, 1);
  Rng host_rng(88);
  ServerState server(d.ta.crs, d.ta.master.mpk);
  std::vector<AttestedReading> readings = {d.sensors[0].attest(as_bytes("m"), 3000)};
  auto bundle = host_aggregate_and_prove(readings, d.ta.crs, d.ta.master.mpk, host_rng);
  CHECK(server.verify(bundle).accepted);
  auto second = server.verify(bundle);
  CHECK(!second.accepted);
  CHECK(second.reason == "replay");
}

TEST_CASE("tampered message bytes -> proof_invalid") {
  auto d = make_deployment(89, 2);
  Rng host_rng(90);
  ServerState server(d.ta.crs, d.ta.master.mpk);
  std::vector<AttestedReading> readings = {d.sensors[0].attest(as_bytes("alpha"), 4000),
                                           d.sensors[1].attest(as_bytes("beta"), 4000)};
  auto bundle = host_aggregate_and_prove(readings, d.ta.crs, d.ta.master.mpk, host_rng);
  bundle.readings[0].payload[0] ^= 1;
  auto res = server.verify(bundle);
  CHECK(!res.accepted);
  CHECK(res.reason == "proof_invalid");
}

TEST_CASE("splicing commitments between two honest bundles fails") {
  auto d = make_deployment(91, 2);
  Rng host_rng(92);
  ServerState server(d.ta.crs, d.ta.master.mpk);
  auto b1 = host_aggregate_and_prove(
      std::vector<AttestedReading>{d.sensors[0].attest(as_bytes("one"), 5000)}, d.ta.crs,
      d.ta.master.mpk, host_rng);
  auto b2 = host_aggregate_and_prove(
      std::vector<AttestedReading>{d.sensors[1].attest(as_bytes("two"), 5001)}, d.ta.crs,
      d.ta.master.mpk, host_rng);
  auto spliced = b1;
  spliced.proof.g2_commitments = b2.proof.g2_commitments;
  CHECK(!server.verify(spliced).accepted);
  spliced = b1;
  spliced.proof.proof = b2.proof.proof;
  CHECK(!server.verify(spliced).accepted);
}

TEST_CASE("report bundle serialization round-trip and wire framing") {
  auto d = make_deployment(93, 2);
  Rng host_rng(94);
  std::vector<AttestedReading> readings = {d.sensors[0].attest(as_bytes("r0"), 6000),
                                           d.sensors[1].attest(as_bytes("r1"), 6000)};
  auto bundle = host_aggregate_and_prove(readings, d.ta.crs, d.ta.master.mpk, host_rng);
  Bytes enc = bundle.serialize();
  auto back = ReportBundle::deserialize(enc);
  REQUIRE(back.has_value());
  CHECK(back->serialize() == enc);
  ServerState server(d.ta.crs, d.ta.master.mpk);
  CHECK(server.verify(*back).accepted);

  Bytes framed = frame_message(MsgType::report, enc);
  auto parsed = parse_message(framed);
  REQUIRE(parsed.has_value());
  CHECK(parsed->second == enc);
}

TEST_CASE("anonymity surface: no identity, pk, signature or cert bytes in the bundle") {
  auto d = make_deployment(95, 2);
  Rng host_rng(96);
  std::vector<AttestedReading> readings = {d.sensors[0].attest(as_bytes("payload-a"), 7000),
                                           d.sensors[1].attest(as_bytes("payload-b"), 7000)};
  auto bundle = host_aggregate_and_prove(readings, d.ta.crs, d.ta.master.mpk, host_rng);
  Bytes wire = bundle.serialize();
  auto contains = [&](std::span<const uint8_t> needle) {
    return std::search(wire.begin(), wire.end(), needle.begin(), needle.end()) != wire.end();
  };
  for (const auto& r : readings) {
    CHECK(!contains(r.identity));
    auto pk = r.pk.serialize();
    CHECK(!contains(pk));
    auto sig = r.sigma.serialize();
    CHECK(!contains(sig));
    auto cert_sig = r.cert.sig.serialize();
    CHECK(!contains(cert_sig));
    // the payloads themselves travel in the clear by design
    CHECK(contains(r.payload));
  }
}

TEST_CASE("bounded replay cache evicts oldest entries") {
  auto d = make_deployment(97, 1);
  Rng host_rng(98);
  ServerState server(d.ta.crs, d.ta.master.mpk, 1);  // capacity one
  auto b1 = host_aggregate_and_prove(
      std::vector<AttestedReading>{d.sensors[0].attest(as_bytes("m1"), 8000)}, d.ta.crs,
      d.ta.master.mpk, host_rng);
  auto b2 = host_aggregate_and_prove(
      std::vector<AttestedReading>{d.sensors[0].attest(as_bytes("m2"), 8001)}, d.ta.crs,
      d.ta.master.mpk, host_rng);
  CHECK(server.verify(b1).accepted);
  CHECK(server.verify(b2).accepted);   // evicts b1's tau
  CHECK(!server.verify(b2).accepted);  // still cached
  CHECK(server.verify(b1).accepted);   // evicted, so (per cache policy) passes again
}

TEST_CASE("overhead report reproduces the worked examples") {
  OverheadRow street = overhead_report({2, {900 * 1024, 82}});
  CHECK(street.overhead_bytes == 520);
  CHECK(street.overhead_fraction == doctest::Approx(0.00056).epsilon(0.02));
  OverheadRow single = overhead_report({1, {82}});
  CHECK(single.overhead_bytes == 400);
  CHECK_THROWS(overhead_report({0, {}}));
}
