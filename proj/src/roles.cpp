#include "pufsense/roles.hpp"

#include <stdexcept>

namespace pufsense::roles {

// --------------------------------------------------------------- messages --

Bytes frame_message(MsgType type, std::span<const uint8_t> payload) {
  ByteWriter w;
  w.u32(uint32_t(payload.size() + 1));
  w.u8(uint8_t(type));
  w.bytes(payload);
  return w.buf;
}

std::optional<std::pair<MsgType, Bytes>> parse_message(std::span<const uint8_t> framed) {
  ByteReader r{framed};
  uint32_t len = r.u32();
  if (r.fail || len < 1 || framed.size() != 4 + len) return std::nullopt;
  uint8_t type = r.u8();
  if (type < 1 || type > 3) return std::nullopt;
  return std::make_pair(MsgType(type), r.take(len - 1));
}

// ------------------------------------------------------------------ setup --

Bytes SetupBundle::serialize() const {
  ByteWriter w;
  w.u8(uint8_t(cfg.setting));
  w.u32(cfg.widths.g1_bits);
  w.u32(cfg.widths.g2_bits);
  w.u32(cfg.widths.gt_bits);
  w.u32(cfg.widths.zp_bits);
  w.bytes(crs.serialize());
  auto mpkb = mpk.serialize();
  w.bytes(mpkb);
  return w.buf;
}

std::optional<SetupBundle> SetupBundle::deserialize(std::span<const uint8_t> in) {
  ByteReader r{in};
  SetupBundle b;
  uint8_t setting = r.u8();
  if (setting > 1) return std::nullopt;
  b.cfg.setting = GroupConfig::Setting(setting);
  b.cfg.widths.g1_bits = r.u32();
  b.cfg.widths.g2_bits = r.u32();
  b.cfg.widths.gt_bits = r.u32();
  b.cfg.widths.zp_bits = r.u32();
  Bytes crs_bytes = r.take(1 + 4 * 32 + 4 * 64);
  Bytes mpk_bytes = r.take(64);
  if (r.fail || !r.done()) return std::nullopt;
  auto crs = niwi::Crs::deserialize(crs_bytes);
  auto mpk = G2::deserialize(mpk_bytes);
  if (!crs || !mpk) return std::nullopt;
  b.crs = *crs;
  b.mpk = *mpk;
  return b;
}

TaState ta_setup(Rng& rng) {
  TaState ta;
  ta.cfg = GroupConfig::bn254();
  Rng master_rng = rng.child("master");
  ta.master = certibs_setup(master_rng);
  Rng crs_rng = rng.child("crs");
  auto bundle = niwi::crs_gen(crs_rng, niwi::CrsMode::binding);
  ta.crs = bundle.crs;
  ta.xk = *bundle.xk;
  return ta;
}

// ----------------------------------------------------------------- sensor --

Sensor::Sensor(Sampler sampler, PufChallenge challenge, EnrollmentRecord record)
    : sampler_(std::move(sampler)),
      challenge_(std::move(challenge)),
      record_(std::move(record)) {
  // counters start at a device-specific offset; otherwise two sensors
  // attesting within the same second would collide on tau, which the
  // anonymous server cannot tell apart from a replay
  Digest h = sha256(record_.identity);
  for (int i = 0; i < 6; i++) counter_ = counter_ << 8 | h[i];
}

Sensor::Sensor(SramPuf puf, PufChallenge challenge, EnrollmentRecord record)
    : Sensor(Sampler([p = std::make_shared<SramPuf>(std::move(puf))](
                         const PufChallenge& c, uint64_t idx) { return p->sample(c, idx); }),
             std::move(challenge), std::move(record)) {}

Sensor::Sensor(RoPuf puf, PufChallenge challenge, EnrollmentRecord record)
    : Sensor(Sampler([p = std::make_shared<RoPuf>(std::move(puf))](
                         const PufChallenge& c, uint64_t idx) { return p->sample(c, idx); }),
             std::move(challenge), std::move(record)) {}

AttestedReading Sensor::attest(std::span<const uint8_t> payload, uint64_t unix_seconds) {
  auto key = rep(sampler_(challenge_, readout_index_++), record_.helper);
  if (!key) throw std::runtime_error("sensor: key extraction failed");
  bn254::Fr sk = scalar_from_key(*key);
  FreshnessTag tau{++counter_, unix_seconds};
  return certibs_attest(sk, record_.identity, record_.pk, record_.cert, payload, tau);
}

// ------------------------------------------------------------------- host --

ReportBundle host_aggregate_and_prove(std::span<const AttestedReading> readings,
                                      const niwi::Crs& crs, const G2& mpk, Rng& rng) {
  if (readings.empty()) throw std::invalid_argument("host: no readings");
  for (const auto& r : readings)
    if (!certibs_verify(mpk, r)) throw std::invalid_argument("host: invalid reading, aborting");

  ReportBundle out;
  out.proof.layout = niwi::PpeStatement::Layout::eq_aggregate;
  out.proof.q = uint16_t(readings.size());

  std::vector<G1> h_ms;
  niwi::Witness witness;
  G1 sig_bar(bn254::Point<bn254::Fp>::infinity());
  for (const auto& r : readings) {
    out.readings.push_back({r.payload, r.tau});
    h_ms.push_back(bn254::hash_to_g1(TAG_MSG, r.signed_message()));
    G1 h_c = bn254::hash_to_g1(TAG_CERT, cert_message(r.identity, r.pk));
    sig_bar = sig_bar + r.sigma.sigma + r.cert.sig.sigma;

    out.proof.d_identity.push_back(
        niwi::commit_scalar(crs, bn254::fr_from_hash(r.identity), rng, nullptr));
    niwi::Opening o_pk, o_hc;
    out.proof.g2_commitments.push_back(niwi::commit_g2(crs, r.pk, rng, &o_pk));
    out.proof.g1_commitments.push_back(niwi::commit_g1(crs, h_c, rng, &o_hc));
    witness.g2_vars.push_back({r.pk, o_pk});
    witness.g1_vars.push_back({h_c, o_hc});
  }
  niwi::Opening o_sib;
  out.proof.g1_commitments.push_back(niwi::commit_g1(crs, sig_bar, rng, &o_sib));
  witness.g1_vars.push_back({sig_bar, o_sib});

  auto stmt = niwi::statement_eq_aggregate(h_ms, mpk);
  out.proof.proof = niwi::prove(crs, stmt, witness, rng);
  return out;
}

// ----------------------------------------------------------------- bundle --

Bytes ReportBundle::serialize() const {
  ByteWriter w;
  w.u16(uint16_t(readings.size()));
  for (const auto& r : readings) {
    w.u32(uint32_t(r.payload.size()));
    w.bytes(r.payload);
    auto t = r.tau.bytes();
    w.bytes(t);
  }
  w.bytes(proof.serialize());
  return w.buf;
}

std::optional<ReportBundle> ReportBundle::deserialize(std::span<const uint8_t> in) {
  ByteReader r{in};
  ReportBundle b;
  uint16_t q = r.u16();
  if (q < 1 || q > 4096) return std::nullopt;
  for (uint16_t i = 0; i < q; i++) {
    uint32_t plen = r.u32();
    if (plen > (1u << 28)) return std::nullopt;
    Reading reading;
    reading.payload = r.take(plen);
    Bytes taub = r.take(16);
    if (r.fail) return std::nullopt;
    reading.tau = FreshnessTag::from_bytes(taub);
    b.readings.push_back(std::move(reading));
  }
  if (r.fail) return std::nullopt;
  auto proof = niwi::ProofBundle::deserialize(in.subspan(r.pos));
  if (!proof) return std::nullopt;
  if (proof->layout != niwi::PpeStatement::Layout::eq_aggregate || proof->q != q)
    return std::nullopt;
  b.proof = std::move(*proof);
  return b;
}

// ----------------------------------------------------------------- server --

ServerState::ServerState(niwi::Crs crs, G2 mpk, size_t replay_capacity)
    : crs_(std::move(crs)), mpk_(mpk), capacity_(replay_capacity) {}

bool ServerState::tau_seen(const Bytes& tau) const {
  return seen_.count(std::string(tau.begin(), tau.end())) > 0;
}

void ServerState::remember_tau(Bytes tau) {
  if (order_.size() >= capacity_) {
    const Bytes& oldest = order_.front();
    seen_.erase(std::string(oldest.begin(), oldest.end()));
    order_.pop_front();
  }
  seen_.insert(std::string(tau.begin(), tau.end()));
  order_.push_back(std::move(tau));
}

VerifyResult ServerState::verify(const ReportBundle& bundle) {
  auto reject = [&](const char* reason) {
    rejected_++;
    log_.push_back(reason);
    return VerifyResult{false, reason};
  };

  uint16_t q = bundle.q();
  if (q < 1 || bundle.proof.q != q ||
      bundle.proof.layout != niwi::PpeStatement::Layout::eq_aggregate ||
      bundle.proof.d_identity.size() != q || bundle.proof.g2_commitments.size() != q ||
      bundle.proof.g1_commitments.size() != size_t(q) + 1)
    return reject("malformed");

  // freshness before the expensive pairing work; duplicates inside one
  // bundle count as replays too
  std::unordered_set<std::string> in_bundle;
  for (const auto& r : bundle.readings) {
    auto t = r.tau.bytes();
    Bytes tau(t.begin(), t.end());
    if (tau_seen(tau) || !in_bundle.insert(std::string(tau.begin(), tau.end())).second)
      return reject("replay");
  }

  std::vector<G1> h_ms;
  for (const auto& r : bundle.readings) {
    Bytes m = r.payload;
    auto t = r.tau.bytes();
    m.insert(m.end(), t.begin(), t.end());
    h_ms.push_back(bn254::hash_to_g1(TAG_MSG, m));
  }
  auto stmt = niwi::statement_eq_aggregate(h_ms, mpk_);
  if (!niwi::verify(crs_, stmt, bundle.proof.g2_commitments, bundle.proof.g1_commitments,
                    bundle.proof.proof))
    return reject("proof_invalid");

  for (const auto& r : bundle.readings) {
    auto t = r.tau.bytes();
    remember_tau(Bytes(t.begin(), t.end()));
  }
  accepted_++;
  log_.push_back("accept");
  return {true, "accept"};
}

// --------------------------------------------------------------- overhead --

OverheadRow overhead_report(const AppProfile& profile) {
  if (profile.q < 1) throw std::invalid_argument("overhead_report: q < 1");
  OverheadRow row;
  row.q = profile.q;
  for (uint64_t s : profile.payload_sizes) row.payload_bytes += s;
  row.overhead_bytes =
      niwi::element_counts(GroupConfig::Setting::asymmetric, profile.q, true).bytes();
  row.actual_overhead_bytes = niwi::actual_element_counts(profile.q).bytes();
  if (row.payload_bytes)
    row.overhead_fraction = double(row.overhead_bytes) / double(row.payload_bytes);
  return row;
}

}  // namespace pufsense::roles
