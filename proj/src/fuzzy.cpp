#include "pufsense/fuzzy.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace pufsense {

HelperData gen(const PufResponse& r, const KeyMaterial& key, const CodeParams& code,
               const PufChallenge& challenge) {
  if (key.bits.empty()) throw std::invalid_argument("gen: empty key");
  if (key.bits.size() > 0xffff) throw std::invalid_argument("gen: key too long");
  auto codec = make_codec(code);
  size_t blocks = num_blocks(uint16_t(key.bits.size()), code);
  if (r.bits.size() < blocks * code.n)
    throw std::invalid_argument("gen: response too short for code and key length");

  HelperData h;
  h.code = code;
  h.key_len = uint16_t(key.bits.size());
  h.challenge = challenge;
  for (size_t b = 0; b < blocks; b++) {
    BitVec block(code.k);
    for (size_t j = 0; j < code.k; j++) {
      size_t idx = b * code.k + j;
      block.set(j, idx < key.bits.size() ? key.bits[idx] : 0);
    }
    BitVec cw = codec->encode(block);
    h.w.append(r.bits.slice(b * code.n, code.n) ^ cw);
  }
  return h;
}

std::optional<KeyMaterial> rep(const PufResponse& r_noisy, const HelperData& helper) {
  const CodeParams& code = helper.code;
  size_t blocks = num_blocks(helper.key_len, code);
  if (helper.w.size() != blocks * code.n) return std::nullopt;
  if (r_noisy.bits.size() < helper.w.size()) return std::nullopt;
  auto codec = make_codec(code);

  BitVec key;
  for (size_t b = 0; b < blocks; b++) {
    BitVec cw = r_noisy.bits.slice(b * code.n, code.n) ^ helper.w.slice(b * code.n, code.n);
    auto msg = codec->decode(cw);
    if (!msg) return std::nullopt;
    key.append(*msg);
  }
  return KeyMaterial{key.slice(0, helper.key_len)};
}

HdaFootprint hda_footprint(const CodeParams& code, uint32_t key_len) {
  if (key_len == 0) throw std::invalid_argument("hda_footprint: key_len == 0");
  double ratio = double(code.n) / double(code.k);
  HdaFootprint f;
  f.helper_bits = uint32_t(std::lround(ratio * key_len));
  f.logic_gates = f.helper_bits + 3;
  f.num_ros = uint32_t(std::lround(ratio / 3.0 * key_len)) + 1;
  return f;
}

TrialStats failure_rate_trial(const PufResponse& enrolled, const CodeParams& code,
                              uint16_t key_len, double flip_rate, uint32_t trials,
                              uint64_t seed) {
  if (trials == 0) throw std::invalid_argument("failure_rate_trial: trials == 0");
  Rng rng(seed);
  Rng key_rng = rng.child("key");
  BitVec key_bits(key_len);
  for (size_t i = 0; i < key_len; i++) key_bits.set(i, key_rng.bernoulli(0.5));
  KeyMaterial key{key_bits};
  HelperData helper = gen(enrolled, key, code, PufChallenge{});

  TrialStats stats;
  stats.trials = trials;
  Rng noise = rng.child("noise");
  for (uint32_t t = 0; t < trials; t++) {
    PufResponse noisy = enrolled;
    for (size_t i = 0; i < noisy.bits.size(); i++)
      if (noise.bernoulli(flip_rate)) noisy.bits.flip(i);
    auto extracted = rep(noisy, helper);
    if (!extracted || !(*extracted == key)) stats.failures++;
  }
  stats.failure_fraction = double(stats.failures) / double(trials);
  return stats;
}

TrialStats failure_rate_trial(const SramPuf& model, const PufChallenge& challenge,
                              const CodeParams& code, uint16_t key_len, double flip_rate,
                              uint32_t trials, uint64_t seed) {
  return failure_rate_trial(model.reference(challenge), code, key_len, flip_rate, trials, seed);
}

TrialStats failure_rate_trial(const RoPuf& model, const PufChallenge& challenge,
                              const CodeParams& code, uint16_t key_len, double flip_rate,
                              uint32_t trials, uint64_t seed) {
  return failure_rate_trial(model.reference(challenge), code, key_len, flip_rate, trials, seed);
}

// -------------------------------------------------------- helper file IO --

namespace {
constexpr char MAGIC[4] = {'P', 'U', 'F', 'W'};
constexpr uint8_t VERSION = 1;
}  // namespace

Bytes serialize_helper(const HelperData& helper, std::span<const uint8_t> storage_key) {
  ByteWriter w;
  w.str(std::string_view(MAGIC, 4));
  w.u8(VERSION);
  w.u8(uint8_t(helper.code.family));
  w.u16(helper.code.n);
  w.u16(helper.code.k);
  w.u16(helper.code.d);
  w.u16(helper.key_len);
  Bytes challenge = helper.challenge.serialize();
  w.u16(uint16_t(challenge.size()));
  w.bytes(challenge);
  w.u32(uint32_t(helper.w.size()));
  w.bytes(helper.w.packed());
  Digest mac = hmac_sha256(storage_key, w.buf);
  w.bytes(mac);
  return w.buf;
}

std::optional<HelperData> parse_helper(std::span<const uint8_t> data,
                                       std::span<const uint8_t> storage_key) {
  if (data.size() < 4 + 1 + 1 + 8 + 2 + 4 + 32) return std::nullopt;
  // authenticate first
  std::span<const uint8_t> body = data.first(data.size() - 32);
  Digest mac = hmac_sha256(storage_key, body);
  if (std::memcmp(mac.data(), data.data() + data.size() - 32, 32) != 0) return std::nullopt;

  ByteReader r{body};
  Bytes magic = r.take(4);
  if (magic != Bytes{'P', 'U', 'F', 'W'}) return std::nullopt;
  if (r.u8() != VERSION) return std::nullopt;
  HelperData h;
  h.code.family = CodeParams::Family(r.u8());
  h.code.n = r.u16();
  h.code.k = r.u16();
  h.code.d = r.u16();
  h.key_len = r.u16();
  uint16_t clen = r.u16();
  Bytes cbytes = r.take(clen);
  auto challenge = PufChallenge::deserialize(cbytes);
  if (!challenge) return std::nullopt;
  h.challenge = *challenge;
  uint32_t wbits = r.u32();
  Bytes packed = r.take((wbits + 7) / 8);
  if (r.fail || !r.done()) return std::nullopt;
  h.w = BitVec::from_packed(packed, wbits);
  if (h.code.k == 0 || h.w.size() != num_blocks(h.key_len, h.code) * h.code.n)
    return std::nullopt;
  return h;
}

}  // namespace pufsense
