#pragma once

// Decentralized secure-node pipeline: PUF-derived signing/encryption keys
// restored at boot, three-frame-differencing event trigger, per-frame
// encrypt-then-MAC with one signature over the ordered MAC chain plus a
// freshness timestamp, and a software model of the boot chain of trust.

#include <optional>
#include <string>
#include <vector>

#include "pufsense/bls.hpp"
#include "pufsense/replay_cache.hpp"

namespace pufsense::node {

// ----------------------------------------------------------------- frames --

struct Frame {
  enum class Layout : uint8_t { gray8 = 1, yuv422 = 2 };

  uint32_t width = 0;
  uint32_t height = 0;
  Layout layout = Layout::gray8;
  Bytes pixels;

  size_t expected_bytes() const {
    return size_t(width) * height * (layout == Layout::yuv422 ? 2 : 1);
  }
  bool valid() const { return width && height && pixels.size() == expected_bytes(); }

  /// Luma plane sample (Y of YUYV for yuv422).
  uint8_t luma(uint32_t x, uint32_t y) const {
    size_t idx = size_t(y) * width + x;
    return layout == Layout::yuv422 ? pixels[2 * idx] : pixels[idx];
  }

  bool operator==(const Frame&) const = default;
};

/// Test scene: gradient background with a bright square moving one step per
/// frame index.
Frame synthetic_frame(uint32_t width, uint32_t height, Frame::Layout layout, uint32_t scene_index,
                      uint32_t square_side);
std::vector<Frame> synthetic_sequence(uint32_t width, uint32_t height, uint32_t count,
                                      Frame::Layout layout = Frame::Layout::gray8);

// Binary portable graymap (P5), 8-bit.
Bytes write_pgm(const Frame& frame);
std::optional<Frame> parse_pgm(std::span<const uint8_t> data);

// -------------------------------------------------------- event detection --

struct MotionParams {
  uint8_t pixel_threshold = 25;   // per-pixel luma delta
  double area_fraction = 0.01;    // event iff active pixels exceed this share
};

struct MotionResult {
  bool event = false;
  size_t active_pixels = 0;
  std::vector<uint8_t> mask;  // 0/1 per pixel
};

/// Three-frame differencing: motion where the current frame differs from
/// both predecessors, which erases single-frame ghosts.
MotionResult detect_event(const Frame& current, const Frame& prev1, const Frame& prev2,
                          const MotionParams& params);

// ------------------------------------------------------------------- keys --

struct CameraKeys {
  bn254::Fr sk;   // 160-bit signing scalar, PUF-bound
  bn254::G2 pk;
  Bytes k_e;      // AES-128 frame encryption key, PUF-bound
  Bytes k_m;      // MAC key, derived from k_e
};

/// Domain-separated MAC-key derivation from the encryption key.
Bytes derive_mac_key(std::span<const uint8_t> k_e);

// ---------------------------------------------------------------- footage --

struct ProtectedFootage {
  Bytes identity;
  uint64_t event_count = 0;
  uint32_t width = 0, height = 0;
  Frame::Layout layout = Frame::Layout::gray8;
  std::vector<Bytes> ciphertexts;
  std::vector<Digest> macs;  // audit copies; the verifier recomputes them
  Digest tau{};
  Signature sigma;

  uint32_t n() const { return uint32_t(ciphertexts.size()); }

  /// "SFTG" container. MACs are not transmitted.
  Bytes serialize() const;
  static std::optional<ProtectedFootage> deserialize(std::span<const uint8_t> data);
};

Digest footage_tau(std::span<const uint8_t> identity, uint64_t event_count);

/// Encrypt every frame (counter mode, nonce = event_count || frame index),
/// MAC every ciphertext, sign identity || N || h_1..h_N || tau.
ProtectedFootage protect_footage(const CameraKeys& keys, std::span<const uint8_t> identity,
                                 uint64_t event_count, std::span<const Frame> frames);

/// Wire size of the upload tuple {C_1..C_N, tau, sigma} at the given group
/// widths; the overhead beyond the ciphertexts is |tau| + |sigma|.
uint64_t upload_bits(const ProtectedFootage& footage, const GroupWidths& widths);
uint64_t upload_overhead_bits(const GroupWidths& widths);

// -------------------------------------------------------------- caretaker --

/// pk, cert and decryption key handed over during deployment; never carries
/// the signing key.
struct KeyExchangeRecord {
  Bytes identity;
  bn254::G2 pk;
  Certificate cert;
  Bytes k_e;

  Bytes mac_key() const { return derive_mac_key(k_e); }
  Bytes serialize() const;
  static std::optional<KeyExchangeRecord> deserialize(std::span<const uint8_t> in);
};

KeyExchangeRecord key_exchange_export(const CameraKeys& keys, std::span<const uint8_t> identity,
                                      const Certificate& cert);

struct DecryptResult {
  std::optional<std::vector<Frame>> frames;
  std::string reason;  // "ok" | cert_invalid | sig_invalid | mac_mismatch |
                       // replay | timestamp_malformed
};

DecryptResult caretaker_verify_decrypt(const KeyExchangeRecord& record, const bn254::G2& mpk,
                                       const ProtectedFootage& footage,
                                       BoundedReplayCache& replay_cache);

// -------------------------------------------------------------- boot chain --

struct BootPartition {
  std::string name;
  Bytes ciphertext;
  Digest mac{};
  Signature sig;  // binds the partition to its predecessor's digest
};

struct BootImage {
  bn254::G2 root_pk;  // immutable header, mask-ROM analog
  std::vector<BootPartition> partitions;

  Bytes serialize() const;
  static std::optional<BootImage> deserialize(std::span<const uint8_t> in);
};

/// Fixed chain order.
extern const std::array<const char*, 5> BOOT_PARTITION_NAMES;

struct BootChainKeys {
  Bytes k_enc;  // 32 bytes, AES-256
  Bytes k_mac;  // 32 bytes
  bn254::Fr root_sk;
  bn254::G2 root_pk;
};

BootChainKeys make_boot_chain_keys(Rng& rng);

BootImage build_boot_image(std::span<const Bytes> plaintexts, const BootChainKeys& keys);

struct BootVerifyResult {
  bool ok = false;
  std::string failed_partition;  // empty when ok
};

/// Walks the chain from the immutable root key: MAC per partition, signature
/// per link against the predecessor digest.
BootVerifyResult verify_boot_chain(const BootImage& image, std::span<const uint8_t> k_mac);

std::optional<std::vector<Bytes>> decrypt_boot_image(const BootImage& image,
                                                     std::span<const uint8_t> k_enc);

// ------------------------------------------------------------------- boot --

struct BootResult {
  std::optional<CameraKeys> keys;
  std::string reason;  // "ok" | "boot_chain:<partition>" | "key_extraction"
};

/// Secure start: refuse unless the boot chain verifies, then reconstruct
/// both keys from fresh PUF readouts.
BootResult node_boot(const BootImage& image, std::span<const uint8_t> k_mac, const RoPuf& puf,
                     const HelperData& w_sign, const HelperData& w_enc, uint64_t readout_index);
BootResult node_boot(const BootImage& image, std::span<const uint8_t> k_mac, const SramPuf& puf,
                     const HelperData& w_sign, const HelperData& w_enc, uint64_t readout_index);

}  // namespace pufsense::node
