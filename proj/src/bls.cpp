#include "pufsense/bls.hpp"

#include <algorithm>
#include <stdexcept>

namespace pufsense {

using bn254::Fr;
using bn254::G1;
using bn254::G2;

Signature bls_sign(std::string_view tag, const Fr& sk, std::span<const uint8_t> msg) {
  return {bn254::hash_to_g1(tag, msg) * sk};
}

bool bls_verify(std::string_view tag, const G2& pk, std::span<const uint8_t> msg,
                const Signature& sig) {
  if (sig.sigma.is_infinity() || pk.is_infinity()) return false;
  if (!sig.sigma.on_curve() || !pk.on_curve()) return false;
  // e(sigma, g2) == e(H(m), pk)
  bn254::PairingProduct acc;
  acc.add(sig.sigma.neg(), G2::generator());
  acc.add(bn254::hash_to_g1(tag, msg), pk);
  return acc.result().is_one();
}

AggregateSignature bls_aggregate(std::span<const Signature> sigs) {
  if (sigs.empty()) throw std::invalid_argument("bls_aggregate: empty list");
  G1 acc = sigs[0].sigma;
  for (size_t i = 1; i < sigs.size(); i++) acc = acc + sigs[i].sigma;
  return {acc};
}

bool bls_aggregate_verify(std::span<const AggregationEntry> entries,
                          const AggregateSignature& agg) {
  if (entries.empty()) throw std::invalid_argument("bls_aggregate_verify: empty list");
  std::vector<Bytes> fingerprints;
  fingerprints.reserve(entries.size());
  for (const auto& e : entries) {
    ByteWriter w;
    w.u16(uint16_t(e.tag.size()));
    w.str(e.tag);
    w.u32(uint32_t(e.msg.size()));
    w.bytes(e.msg);
    auto pk = e.pk.serialize();
    w.bytes(pk);
    fingerprints.push_back(std::move(w.buf));
  }
  std::sort(fingerprints.begin(), fingerprints.end());
  if (std::adjacent_find(fingerprints.begin(), fingerprints.end()) != fingerprints.end())
    throw std::invalid_argument("bls_aggregate_verify: duplicate message under the same key");

  if (agg.sigma.is_infinity() || !agg.sigma.on_curve()) return false;
  bn254::PairingProduct acc;
  acc.add(agg.sigma.neg(), G2::generator());
  for (const auto& e : entries) {
    if (e.pk.is_infinity() || !e.pk.on_curve()) return false;
    acc.add(bn254::hash_to_g1(e.tag, e.msg), e.pk);
  }
  return acc.result().is_one();
}

// --------------------------------------------------------------- Cert-IBS --

Bytes Certificate::serialize() const {
  ByteWriter w;
  auto pkb = pk.serialize();
  w.bytes(pkb);
  auto sb = sig.serialize();
  w.bytes(sb);
  return w.buf;
}

std::optional<Certificate> Certificate::deserialize(std::span<const uint8_t> in) {
  if (in.size() != 96) return std::nullopt;
  auto pk = G2::deserialize(in.first(64));
  auto sig = Signature::deserialize(in.subspan(64));
  if (!pk || !sig) return std::nullopt;
  return Certificate{*pk, *sig};
}

Bytes AttestedReading::signed_message() const {
  Bytes m = payload;
  auto t = tau.bytes();
  m.insert(m.end(), t.begin(), t.end());
  return m;
}

Bytes AttestedReading::serialize() const {
  ByteWriter w;
  w.u32(uint32_t(payload.size()));
  w.bytes(payload);
  auto t = tau.bytes();
  w.bytes(t);
  w.u16(uint16_t(identity.size()));
  w.bytes(identity);
  auto pkb = pk.serialize();
  w.bytes(pkb);
  auto sb = sigma.serialize();
  w.bytes(sb);
  w.bytes(cert.serialize());
  return w.buf;
}

std::optional<AttestedReading> AttestedReading::deserialize(std::span<const uint8_t> in) {
  ByteReader r{in};
  AttestedReading a;
  uint32_t plen = r.u32();
  if (plen > (1u << 28)) return std::nullopt;
  a.payload = r.take(plen);
  Bytes taub = r.take(16);
  if (r.fail) return std::nullopt;
  a.tau = FreshnessTag::from_bytes(taub);
  a.identity = r.take(r.u16());
  Bytes pkb = r.take(64);
  Bytes sb = r.take(32);
  Bytes cb = r.take(96);
  if (r.fail || !r.done()) return std::nullopt;
  auto pk = G2::deserialize(pkb);
  auto sig = Signature::deserialize(sb);
  auto cert = Certificate::deserialize(cb);
  if (!pk || !sig || !cert) return std::nullopt;
  a.pk = *pk;
  a.sigma = *sig;
  a.cert = *cert;
  return a;
}

Bytes cert_message(std::span<const uint8_t> identity, const G2& pk) {
  ByteWriter w;
  w.u16(uint16_t(identity.size()));
  w.bytes(identity);
  auto pkb = pk.serialize();
  w.bytes(pkb);
  return w.buf;
}

MasterKeys certibs_setup(Rng& rng) {
  Fr msk = bn254::random_fr(rng);
  return {msk, G2::generator() * msk};
}

KeyMaterial random_key_material(Rng& rng, uint16_t bits) {
  BitVec b(bits);
  for (uint16_t i = 0; i < bits; i++) b.set(i, rng.bernoulli(0.5));
  return {b};
}

bn254::Fr scalar_from_key(const KeyMaterial& key) {
  // big-endian interpretation; 160-bit keys stay below the group order
  return Fr::from_bytes_mod(key.bits.packed());
}

EnrollmentRecord certibs_enroll(Rng& rng, const MasterKeys& master,
                                std::span<const uint8_t> identity, const PufResponse& response,
                                const CodeParams& code, const PufChallenge& challenge) {
  KeyMaterial sk_material = random_key_material(rng, SIGNING_KEY_BITS);
  Fr sk = scalar_from_key(sk_material);
  G2 pk = G2::generator() * sk;
  HelperData helper = gen(response, sk_material, code, challenge);

  EnrollmentRecord rec;
  rec.identity.assign(identity.begin(), identity.end());
  rec.pk = pk;
  rec.cert = {pk, bls_sign(TAG_CERT, master.msk, cert_message(identity, pk))};
  rec.helper = std::move(helper);
  return rec;
}

AttestedReading certibs_attest(const Fr& sk, std::span<const uint8_t> identity, const G2& pk,
                               const Certificate& cert, std::span<const uint8_t> payload,
                               const FreshnessTag& tau) {
  AttestedReading a;
  a.payload.assign(payload.begin(), payload.end());
  a.tau = tau;
  a.identity.assign(identity.begin(), identity.end());
  a.pk = pk;
  a.cert = cert;
  a.sigma = bls_sign(TAG_MSG, sk, a.signed_message());
  return a;
}

bool certibs_verify(const G2& mpk, const AttestedReading& reading) {
  if (!bls_verify(TAG_MSG, reading.pk, reading.signed_message(), reading.sigma)) return false;
  if (!reading.cert.pk.eq(reading.pk)) return false;
  return bls_verify(TAG_CERT, mpk, cert_message(reading.identity, reading.cert.pk),
                    reading.cert.sig);
}

}  // namespace pufsense
