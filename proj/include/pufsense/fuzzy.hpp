#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "pufsense/bits.hpp"
#include "pufsense/codes.hpp"
#include "pufsense/crypto_util.hpp"
#include "pufsense/puf.hpp"

namespace pufsense {

/// Secret key bits bound to (or recovered from) a device response.
struct KeyMaterial {
  BitVec bits;

  Bytes bytes() const { return bits.packed(); }
  bool operator==(const KeyMaterial&) const = default;
};

/// Public code-offset mask. Public but integrity-protected at rest: the file
/// form carries an HMAC under a harness-level storage key.
struct HelperData {
  BitVec w;
  CodeParams code;
  uint16_t key_len = 0;
  PufChallenge challenge;

  bool operator==(const HelperData&) const = default;
};

inline size_t num_blocks(uint16_t key_len, const CodeParams& code) {
  return (size_t(key_len) + code.k - 1) / code.k;
}

/// Key binding: split the key into k-bit blocks (final block zero-padded),
/// encode each, and mask with the response: W_block = r_block ^ C_block.
HelperData gen(const PufResponse& r, const KeyMaterial& key, const CodeParams& code,
               const PufChallenge& challenge);

/// Key extraction: C'_block = r'_block ^ W_block, decode, reassemble. Exact
/// key iff every block decodes within the code's capacity.
std::optional<KeyMaterial> rep(const PufResponse& r_noisy, const HelperData& helper);

// ------------------------------------------------- size/gate accounting ---

/// Helper-data and hardware budget from the (n/k)*l rule: W bits rounded to
/// nearest, gate count W+3 (3-stage ROs), RO count (n/(3k))*l + 1.
struct HdaFootprint {
  uint32_t helper_bits = 0;
  uint32_t logic_gates = 0;
  uint32_t num_ros = 0;
};

HdaFootprint hda_footprint(const CodeParams& code, uint32_t key_len);

// ------------------------------------------------------ failure harness ---

struct TrialStats {
  uint32_t trials = 0;
  uint32_t failures = 0;
  double failure_fraction = 0.0;
};

/// Bind once, then re-extract `trials` times with fresh uniform bit flips at
/// `flip_rate`; counts decode failures and wrong keys.
TrialStats failure_rate_trial(const PufResponse& enrolled, const CodeParams& code,
                              uint16_t key_len, double flip_rate, uint32_t trials,
                              uint64_t seed);
TrialStats failure_rate_trial(const SramPuf& model, const PufChallenge& challenge,
                              const CodeParams& code, uint16_t key_len, double flip_rate,
                              uint32_t trials, uint64_t seed);
TrialStats failure_rate_trial(const RoPuf& model, const PufChallenge& challenge,
                              const CodeParams& code, uint16_t key_len, double flip_rate,
                              uint32_t trials, uint64_t seed);

// ------------------------------------------------------- helper file IO ---

// "PUFW" container: magic, version, code parameters, key length, challenge,
// packed W, HMAC-SHA256 trailer under the storage key.

Bytes serialize_helper(const HelperData& helper, std::span<const uint8_t> storage_key);
std::optional<HelperData> parse_helper(std::span<const uint8_t> data,
                                       std::span<const uint8_t> storage_key);

}  // namespace pufsense
