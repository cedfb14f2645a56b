#pragma once

// Three-phase centralized protocol: authority setup, sensor enrollment, and
// trusted sensing with anonymized reporting. Four roles exchange immutable
// messages: the TA publishes (group config, crs, mpk); sensors attest
// readings; the host aggregates the signatures and proves knowledge of them;
// the server verifies proofs and freshness.

#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "pufsense/bls.hpp"
#include "pufsense/niwi.hpp"

namespace pufsense::roles {

using bn254::G1;
using bn254::G2;

// --------------------------------------------------------------- messages --

enum class MsgType : uint8_t { setup_bundle = 1, report = 2, verdict = 3 };

/// 32-bit big-endian length framing: length covers type byte + payload.
Bytes frame_message(MsgType type, std::span<const uint8_t> payload);
std::optional<std::pair<MsgType, Bytes>> parse_message(std::span<const uint8_t> framed);

// ------------------------------------------------------------------ setup --

/// Everything a verifier or prover needs; the extraction key stays offline.
struct SetupBundle {
  GroupConfig cfg;
  niwi::Crs crs;
  G2 mpk;

  Bytes serialize() const;
  static std::optional<SetupBundle> deserialize(std::span<const uint8_t> in);
};

struct TaState {
  GroupConfig cfg;
  MasterKeys master;
  niwi::Crs crs;
  niwi::ExtractKey xk;

  SetupBundle public_bundle() const { return {cfg, crs, master.mpk}; }
};

TaState ta_setup(Rng& rng);

// ----------------------------------------------------------------- sensor --

/// Simulated trusted sensor: PUF-backed key, enrollment record, monotonic
/// freshness counter. Key extraction happens per attestation from a fresh
/// noisy readout.
class Sensor {
 public:
  using Sampler = std::function<PufResponse(const PufChallenge&, uint64_t)>;

  Sensor(SramPuf puf, PufChallenge challenge, EnrollmentRecord record);
  Sensor(RoPuf puf, PufChallenge challenge, EnrollmentRecord record);
  Sensor(Sampler sampler, PufChallenge challenge, EnrollmentRecord record);

  /// Signs payload || tau; throws if the key cannot be reconstructed.
  AttestedReading attest(std::span<const uint8_t> payload, uint64_t unix_seconds);

  const Bytes& identity() const { return record_.identity; }
  const EnrollmentRecord& record() const { return record_; }

 private:
  Sampler sampler_;
  PufChallenge challenge_;
  EnrollmentRecord record_;
  uint64_t counter_ = 0;
  uint64_t readout_index_ = 1;  // 0 was the enrollment readout
};

// ------------------------------------------------------------------- host --

struct ReportBundle {
  struct Reading {
    Bytes payload;
    FreshnessTag tau;
  };

  std::vector<Reading> readings;
  niwi::ProofBundle proof;  // aggregate layout: d(I_i), c(pk_i), c(h_ci), c(sig_bar)

  uint16_t q() const { return uint16_t(readings.size()); }

  Bytes serialize() const;
  static std::optional<ReportBundle> deserialize(std::span<const uint8_t> in);
};

/// Aggregates sigma_i * cert_i across all readings and proves the aggregate
/// equation. Any invalid reading aborts the report (std::invalid_argument).
ReportBundle host_aggregate_and_prove(std::span<const AttestedReading> readings,
                                      const niwi::Crs& crs, const G2& mpk, Rng& rng);

// ----------------------------------------------------------------- server --

struct VerifyResult {
  bool accepted = false;
  std::string reason;  // "accept" | "proof_invalid" | "replay" | "malformed"
};

class ServerState {
 public:
  ServerState(niwi::Crs crs, G2 mpk, size_t replay_capacity = 4096);

  VerifyResult verify(const ReportBundle& bundle);

  /// Replay-cache persistence hooks.
  void preload_tau(Bytes tau) { remember_tau(std::move(tau)); }
  std::vector<Bytes> tau_snapshot() const { return {order_.begin(), order_.end()}; }

  size_t accepted_count() const { return accepted_; }
  size_t rejected_count() const { return rejected_; }
  const std::vector<std::string>& log() const { return log_; }

 private:
  bool tau_seen(const Bytes& tau) const;
  void remember_tau(Bytes tau);

  niwi::Crs crs_;
  G2 mpk_;
  size_t capacity_;
  std::deque<Bytes> order_;
  std::unordered_set<std::string> seen_;
  size_t accepted_ = 0, rejected_ = 0;
  std::vector<std::string> log_;
};

// --------------------------------------------------------------- overhead --

struct AppProfile {
  uint32_t q = 1;
  std::vector<uint64_t> payload_sizes;  // bytes per reading
};

struct OverheadRow {
  uint32_t q = 0;
  uint64_t payload_bytes = 0;
  uint64_t overhead_bytes = 0;         // published element count at compact widths
  uint64_t actual_overhead_bytes = 0;  // including the committed h_c elements
  double overhead_fraction = 0;        // overhead_bytes / payload_bytes
};

OverheadRow overhead_report(const AppProfile& profile);

}  // namespace pufsense::roles
