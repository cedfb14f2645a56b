#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pufsense/bn254.hpp"
#include "pufsense/crypto_util.hpp"
#include "pufsense/fuzzy.hpp"

namespace pufsense {

// ----------------------------------------------------------------- groups --

struct GroupWidths {
  uint32_t g1_bits = 0;
  uint32_t g2_bits = 0;
  uint32_t gt_bits = 0;
  uint32_t zp_bits = 0;
};

struct GroupConfig {
  enum class Setting : uint8_t { symmetric = 0, asymmetric = 1 };

  Setting setting = Setting::asymmetric;
  GroupWidths widths;

  /// The implemented backend (asymmetric, 254-bit BN curve).
  static GroupConfig bn254() {
    return {Setting::asymmetric, {256, 512, 3072, 256}};
  }
  /// Compact BN parameter profile used for wire-size accounting.
  static GroupWidths compact_bn_widths() { return {160, 320, 1920, 160}; }
  /// Group element width backing the symmetric-setting size accounting
  /// (supersingular curve over a 512-bit field).
  static constexpr uint32_t symmetric_g_bits = 512;
};

// ------------------------------------------------------------------- BLS --

inline constexpr std::string_view TAG_MSG = "BLS:MSG";
inline constexpr std::string_view TAG_CERT = "BLS:CERT";

struct Signature {
  bn254::G1 sigma;

  std::array<uint8_t, 32> serialize() const { return sigma.serialize(); }
  static std::optional<Signature> deserialize(std::span<const uint8_t> in) {
    auto p = bn254::G1::deserialize(in);
    if (!p) return std::nullopt;
    return Signature{*p};
  }
};
using AggregateSignature = Signature;

Signature bls_sign(std::string_view tag, const bn254::Fr& sk, std::span<const uint8_t> msg);
bool bls_verify(std::string_view tag, const bn254::G2& pk, std::span<const uint8_t> msg,
                const Signature& sig);

/// Product of signatures in G1. Empty input is an error.
AggregateSignature bls_aggregate(std::span<const Signature> sigs);

struct AggregationEntry {
  std::string tag;
  Bytes msg;
  bn254::G2 pk;
};

/// Product-of-pairings check e(sigma_bar, g2) == prod e(H(m_i), pk_i).
/// Duplicate (tag, msg) under the same key is rejected as an error.
bool bls_aggregate_verify(std::span<const AggregationEntry> entries,
                          const AggregateSignature& agg);

// -------------------------------------------------------------- Cert-IBS --

struct MasterKeys {
  bn254::Fr msk;
  bn254::G2 mpk;
};

struct SigningKeyPair {
  bn254::Fr sk;
  bn254::G2 pk;
};

struct Certificate {
  bn254::G2 pk;
  Signature sig;  // authority signature over (pk, identity)

  Bytes serialize() const;
  static std::optional<Certificate> deserialize(std::span<const uint8_t> in);
};

/// Freshness field signed with every reading: monotonic counter plus
/// wall-clock seconds, 16 bytes on the wire.
struct FreshnessTag {
  uint64_t counter = 0;
  uint64_t unix_seconds = 0;

  std::array<uint8_t, 16> bytes() const {
    std::array<uint8_t, 16> out{};
    for (int i = 0; i < 8; i++) out[i] = uint8_t(counter >> (8 * (7 - i)));
    for (int i = 0; i < 8; i++) out[8 + i] = uint8_t(unix_seconds >> (8 * (7 - i)));
    return out;
  }
  static FreshnessTag from_bytes(std::span<const uint8_t> in) {
    FreshnessTag t;
    for (int i = 0; i < 8; i++) t.counter = t.counter << 8 | in[i];
    for (int i = 0; i < 8; i++) t.unix_seconds = t.unix_seconds << 8 | in[8 + i];
    return t;
  }
  bool operator==(const FreshnessTag&) const = default;
};

/// A trusted sensor's signed output tuple (M, tau, I, pk, sigma, cert).
struct AttestedReading {
  Bytes payload;
  FreshnessTag tau;
  Bytes identity;
  bn254::G2 pk;
  Signature sigma;
  Certificate cert;

  /// Preimage of the reading signature: payload || tau.
  Bytes signed_message() const;

  Bytes serialize() const;
  static std::optional<AttestedReading> deserialize(std::span<const uint8_t> in);
};

/// Certified-key preimage: len(I) || I || pk. Hashed with TAG_CERT this is
/// the h_c value that both certificate issuance and verification use.
Bytes cert_message(std::span<const uint8_t> identity, const bn254::G2& pk);

MasterKeys certibs_setup(Rng& rng);

/// 160-bit PUF-bindable signing keys.
inline constexpr uint16_t SIGNING_KEY_BITS = 160;

KeyMaterial random_key_material(Rng& rng, uint16_t bits);
bn254::Fr scalar_from_key(const KeyMaterial& key);

struct EnrollmentRecord {
  Bytes identity;
  bn254::G2 pk;
  Certificate cert;
  HelperData helper;
};

/// Authority-side enrollment: draw sk, bind it to the device response, issue
/// the certificate. The scalar itself is not retained.
EnrollmentRecord certibs_enroll(Rng& rng, const MasterKeys& master,
                                std::span<const uint8_t> identity, const PufResponse& response,
                                const CodeParams& code, const PufChallenge& challenge);

AttestedReading certibs_attest(const bn254::Fr& sk, std::span<const uint8_t> identity,
                               const bn254::G2& pk, const Certificate& cert,
                               std::span<const uint8_t> payload, const FreshnessTag& tau);

bool certibs_verify(const bn254::G2& mpk, const AttestedReading& reading);

}  // namespace pufsense
