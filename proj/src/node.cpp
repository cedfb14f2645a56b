#include "pufsense/node.hpp"

#include <cstring>
#include <stdexcept>

namespace pufsense::node {

namespace {

constexpr std::string_view TAG_BOOT = "BOOT:PTN";

std::array<uint8_t, 16> frame_iv(uint64_t event_count, uint32_t frame_index) {
  std::array<uint8_t, 16> iv{};
  for (int i = 0; i < 8; i++) iv[i] = uint8_t(event_count >> (8 * (7 - i)));
  for (int i = 0; i < 4; i++) iv[8 + i] = uint8_t(frame_index >> (8 * (3 - i)));
  return iv;  // low 4 bytes stay zero for the block counter
}

Bytes footage_sign_preimage(std::span<const uint8_t> identity, uint32_t n,
                            std::span<const Digest> macs, const Digest& tau) {
  // N and the identity are bound in to pin the MAC-chain boundaries
  ByteWriter w;
  w.u16(uint16_t(identity.size()));
  w.bytes(identity);
  w.u32(n);
  for (const auto& h : macs) w.bytes(h);
  w.bytes(tau);
  return w.buf;
}

}  // namespace

// ----------------------------------------------------------------- frames --

Frame synthetic_frame(uint32_t width, uint32_t height, Frame::Layout layout, uint32_t scene_index,
                      uint32_t square_side) {
  Frame f;
  f.width = width;
  f.height = height;
  f.layout = layout;
  f.pixels.assign(f.expected_bytes(), 0);
  uint32_t sx = square_side ? (scene_index * 2) % (width > square_side ? width - square_side : 1)
                            : 0;
  uint32_t sy = height > square_side ? (height - square_side) / 2 : 0;
  for (uint32_t y = 0; y < height; y++) {
    for (uint32_t x = 0; x < width; x++) {
      uint8_t value = uint8_t((x * 7 + y * 3) & 0x3f);  // static background texture
      if (square_side && x >= sx && x < sx + square_side && y >= sy && y < sy + square_side)
        value = 0xe0;
      if (f.layout == Frame::Layout::yuv422) {
        f.pixels[2 * (size_t(y) * width + x)] = value;
        f.pixels[2 * (size_t(y) * width + x) + 1] = 0x80;
      } else {
        f.pixels[size_t(y) * width + x] = value;
      }
    }
  }
  return f;
}

std::vector<Frame> synthetic_sequence(uint32_t width, uint32_t height, uint32_t count,
                                      Frame::Layout layout) {
  std::vector<Frame> out;
  uint32_t side = std::max(2u, width / 8);
  for (uint32_t i = 0; i < count; i++)
    out.push_back(synthetic_frame(width, height, layout, i, side));
  return out;
}

Bytes write_pgm(const Frame& frame) {
  if (!frame.valid()) throw std::invalid_argument("write_pgm: invalid frame");
  std::string header =
      "P5\n" + std::to_string(frame.width) + " " + std::to_string(frame.height) + "\n255\n";
  Bytes out(header.begin(), header.end());
  if (frame.layout == Frame::Layout::gray8) {
    out.insert(out.end(), frame.pixels.begin(), frame.pixels.end());
  } else {
    for (uint32_t y = 0; y < frame.height; y++)
      for (uint32_t x = 0; x < frame.width; x++) out.push_back(frame.luma(x, y));
  }
  return out;
}

std::optional<Frame> parse_pgm(std::span<const uint8_t> data) {
  // header: "P5" ws width ws height ws maxval single-ws, then raster
  size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < data.size() &&
           (data[pos] == ' ' || data[pos] == '\n' || data[pos] == '\r' || data[pos] == '\t')) {
      pos++;
    }
  };
  auto read_int = [&]() -> std::optional<uint32_t> {
    skip_ws();
    if (pos < data.size() && data[pos] == '#') {  // comment line
      while (pos < data.size() && data[pos] != '\n') pos++;
      skip_ws();
    }
    uint64_t v = 0;
    size_t start = pos;
    while (pos < data.size() && data[pos] >= '0' && data[pos] <= '9') v = v * 10 + (data[pos++] - '0');
    if (pos == start || v > 0xffffffffull) return std::nullopt;
    return uint32_t(v);
  };
  if (data.size() < 2 || data[0] != 'P' || data[1] != '5') return std::nullopt;
  pos = 2;
  auto w = read_int(), h = read_int(), maxval = read_int();
  if (!w || !h || !maxval || *maxval != 255 || *w == 0 || *h == 0) return std::nullopt;
  pos++;  // single whitespace after maxval
  if (data.size() - pos < size_t(*w) * *h) return std::nullopt;
  Frame f;
  f.width = *w;
  f.height = *h;
  f.layout = Frame::Layout::gray8;
  f.pixels.assign(data.begin() + pos, data.begin() + pos + size_t(*w) * *h);
  return f;
}

// -------------------------------------------------------- event detection --

MotionResult detect_event(const Frame& current, const Frame& prev1, const Frame& prev2,
                          const MotionParams& params) {
  if (!current.valid() || !prev1.valid() || !prev2.valid() ||
      current.width != prev1.width || current.height != prev1.height ||
      current.width != prev2.width || current.height != prev2.height)
    throw std::invalid_argument("detect_event: frame geometry mismatch");

  MotionResult res;
  res.mask.assign(size_t(current.width) * current.height, 0);
  for (uint32_t y = 0; y < current.height; y++) {
    for (uint32_t x = 0; x < current.width; x++) {
      int c = current.luma(x, y);
      int d1 = std::abs(c - int(prev1.luma(x, y)));
      int d2 = std::abs(c - int(prev2.luma(x, y)));
      if (d1 > params.pixel_threshold && d2 > params.pixel_threshold) {
        res.mask[size_t(y) * current.width + x] = 1;
        res.active_pixels++;
      }
    }
  }
  res.event = double(res.active_pixels) >
              params.area_fraction * double(current.width) * double(current.height);
  return res;
}

// ------------------------------------------------------------------- keys --

Bytes derive_mac_key(std::span<const uint8_t> k_e) {
  ByteWriter w;
  w.str("KDF:MAC");
  w.bytes(k_e);
  Digest d = sha256(w.buf);
  return Bytes(d.begin(), d.end());
}

// ---------------------------------------------------------------- footage --

Digest footage_tau(std::span<const uint8_t> identity, uint64_t event_count) {
  ByteWriter w;
  w.bytes(identity);
  w.u64(event_count);
  return sha256(w.buf);
}

ProtectedFootage protect_footage(const CameraKeys& keys, std::span<const uint8_t> identity,
                                 uint64_t event_count, std::span<const Frame> frames) {
  if (frames.empty()) throw std::invalid_argument("protect_footage: no frames");
  for (const auto& f : frames)
    if (!f.valid() || f.width != frames[0].width || f.height != frames[0].height ||
        f.layout != frames[0].layout)
      throw std::invalid_argument("protect_footage: inconsistent frames");

  ProtectedFootage out;
  out.identity.assign(identity.begin(), identity.end());
  out.event_count = event_count;
  out.width = frames[0].width;
  out.height = frames[0].height;
  out.layout = frames[0].layout;
  for (uint32_t i = 0; i < frames.size(); i++) {
    out.ciphertexts.push_back(aes_ctr(keys.k_e, frame_iv(event_count, i), frames[i].pixels));
    out.macs.push_back(hmac_sha256(keys.k_m, out.ciphertexts.back()));
  }
  out.tau = footage_tau(identity, event_count);
  out.sigma =
      bls_sign(TAG_MSG, keys.sk, footage_sign_preimage(identity, out.n(), out.macs, out.tau));
  return out;
}

uint64_t upload_bits(const ProtectedFootage& footage, const GroupWidths& widths) {
  uint64_t bits = 0;
  for (const auto& c : footage.ciphertexts) bits += 8 * c.size();
  return bits + upload_overhead_bits(widths);
}

uint64_t upload_overhead_bits(const GroupWidths& widths) { return 256 + widths.g1_bits; }

Bytes ProtectedFootage::serialize() const {
  ByteWriter w;
  w.str("SFTG");
  w.u8(1);  // version
  w.u16(uint16_t(identity.size()));
  w.bytes(identity);
  w.u64(event_count);
  w.u32(n());
  w.u32(width);
  w.u32(height);
  w.u8(uint8_t(layout));
  for (const auto& c : ciphertexts) {
    w.u32(uint32_t(c.size()));
    w.bytes(c);
  }
  w.bytes(tau);
  auto sig = sigma.serialize();
  w.bytes(sig);
  return w.buf;
}

std::optional<ProtectedFootage> ProtectedFootage::deserialize(std::span<const uint8_t> data) {
  ByteReader r{data};
  Bytes magic = r.take(4);
  if (magic != Bytes{'S', 'F', 'T', 'G'} || r.u8() != 1) return std::nullopt;
  ProtectedFootage f;
  f.identity = r.take(r.u16());
  f.event_count = r.u64();
  uint32_t n = r.u32();
  f.width = r.u32();
  f.height = r.u32();
  uint8_t layout = r.u8();
  if (r.fail || n == 0 || n > (1u << 20) || layout < 1 || layout > 2) return std::nullopt;
  f.layout = Frame::Layout(layout);
  for (uint32_t i = 0; i < n; i++) {
    uint32_t len = r.u32();
    if (len > (1u << 28)) return std::nullopt;
    f.ciphertexts.push_back(r.take(len));
    if (r.fail) return std::nullopt;
  }
  Bytes tau = r.take(32);
  Bytes sig = r.take(32);
  if (r.fail || !r.done()) return std::nullopt;
  std::memcpy(f.tau.data(), tau.data(), 32);
  auto s = Signature::deserialize(sig);
  if (!s) return std::nullopt;
  f.sigma = *s;
  return f;
}

// -------------------------------------------------------------- caretaker --

Bytes KeyExchangeRecord::serialize() const {
  ByteWriter w;
  w.u16(uint16_t(identity.size()));
  w.bytes(identity);
  auto pkb = pk.serialize();
  w.bytes(pkb);
  w.bytes(cert.serialize());
  w.u8(uint8_t(k_e.size()));
  w.bytes(k_e);
  return w.buf;
}

std::optional<KeyExchangeRecord> KeyExchangeRecord::deserialize(std::span<const uint8_t> in) {
  ByteReader r{in};
  KeyExchangeRecord rec;
  rec.identity = r.take(r.u16());
  Bytes pkb = r.take(64);
  Bytes certb = r.take(96);
  rec.k_e = r.take(r.u8());
  if (r.fail || !r.done()) return std::nullopt;
  auto pk = bn254::G2::deserialize(pkb);
  auto cert = Certificate::deserialize(certb);
  if (!pk || !cert) return std::nullopt;
  rec.pk = *pk;
  rec.cert = *cert;
  return rec;
}

KeyExchangeRecord key_exchange_export(const CameraKeys& keys, std::span<const uint8_t> identity,
                                      const Certificate& cert) {
  KeyExchangeRecord rec;
  rec.identity.assign(identity.begin(), identity.end());
  rec.pk = keys.pk;
  rec.cert = cert;
  rec.k_e = keys.k_e;
  return rec;
}

DecryptResult caretaker_verify_decrypt(const KeyExchangeRecord& record, const bn254::G2& mpk,
                                       const ProtectedFootage& footage,
                                       BoundedReplayCache& replay_cache) {
  auto reject = [](const char* reason) { return DecryptResult{std::nullopt, reason}; };

  if (footage.n() == 0) return reject("timestamp_malformed");
  if (!(footage.tau == footage_tau(footage.identity, footage.event_count)))
    return reject("timestamp_malformed");
  if (replay_cache.seen(footage.tau)) return reject("replay");

  // certificate is checked against the identity the footage claims, so a
  // foreign identity fails here even with a self-consistent tau
  if (!bls_verify(TAG_CERT, mpk, cert_message(footage.identity, record.pk), record.cert.sig) ||
      !record.cert.pk.eq(record.pk))
    return reject("cert_invalid");

  // recompute the MAC chain from the received ciphertexts
  Bytes k_m = record.mac_key();
  std::vector<Digest> macs;
  for (const auto& c : footage.ciphertexts) macs.push_back(hmac_sha256(k_m, c));
  if (!footage.macs.empty()) {  // audit copies present (in-memory path)
    if (footage.macs.size() != macs.size()) return reject("mac_mismatch");
    for (size_t i = 0; i < macs.size(); i++)
      if (footage.macs[i] != macs[i]) return reject("mac_mismatch");
  }

  Bytes preimage = footage_sign_preimage(footage.identity, footage.n(), macs, footage.tau);
  if (!bls_verify(TAG_MSG, record.pk, preimage, footage.sigma)) return reject("sig_invalid");

  std::vector<Frame> frames;
  for (uint32_t i = 0; i < footage.n(); i++) {
    Frame f;
    f.width = footage.width;
    f.height = footage.height;
    f.layout = footage.layout;
    f.pixels = aes_ctr(record.k_e, frame_iv(footage.event_count, i), footage.ciphertexts[i]);
    if (!f.valid()) return reject("timestamp_malformed");
    frames.push_back(std::move(f));
  }
  replay_cache.remember(footage.tau);
  return {std::move(frames), "ok"};
}

// -------------------------------------------------------------- boot chain --

const std::array<const char*, 5> BOOT_PARTITION_NAMES = {"fsbl", "bitstream", "uboot", "os",
                                                         "app"};

BootChainKeys make_boot_chain_keys(Rng& rng) {
  BootChainKeys keys;
  keys.k_enc.resize(32);
  keys.k_mac.resize(32);
  rng.fill_bytes(keys.k_enc);
  rng.fill_bytes(keys.k_mac);
  keys.root_sk = bn254::random_fr(rng);
  keys.root_pk = bn254::G2::generator() * keys.root_sk;
  return keys;
}

namespace {

std::array<uint8_t, 16> boot_iv(uint32_t index) {
  std::array<uint8_t, 16> iv{'B', 'O', 'O', 'T', 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0};
  for (int i = 0; i < 4; i++) iv[4 + i] = uint8_t(index >> (8 * (3 - i)));
  return iv;
}

Bytes link_preimage(const std::string& name, const Digest& mac, const Digest& prev_digest) {
  ByteWriter w;
  w.u16(uint16_t(name.size()));
  w.str(name);
  w.bytes(mac);
  w.bytes(prev_digest);
  return w.buf;
}

Digest chain_digest(const Digest& prev, const Digest& mac) {
  ByteWriter w;
  w.bytes(prev);
  w.bytes(mac);
  return sha256(w.buf);
}

}  // namespace

BootImage build_boot_image(std::span<const Bytes> plaintexts, const BootChainKeys& keys) {
  if (plaintexts.size() != BOOT_PARTITION_NAMES.size())
    throw std::invalid_argument("build_boot_image: expected one blob per partition");
  BootImage image;
  image.root_pk = keys.root_pk;
  Digest prev = sha256(image.root_pk.serialize());
  for (size_t i = 0; i < plaintexts.size(); i++) {
    BootPartition p;
    p.name = BOOT_PARTITION_NAMES[i];
    p.ciphertext = aes_ctr(keys.k_enc, boot_iv(uint32_t(i)), plaintexts[i]);
    p.mac = hmac_sha256(keys.k_mac, p.ciphertext);
    p.sig = bls_sign(TAG_BOOT, keys.root_sk, link_preimage(p.name, p.mac, prev));
    prev = chain_digest(prev, p.mac);
    image.partitions.push_back(std::move(p));
  }
  return image;
}

BootVerifyResult verify_boot_chain(const BootImage& image, std::span<const uint8_t> k_mac) {
  if (image.partitions.size() != BOOT_PARTITION_NAMES.size())
    return {false, "structure"};
  Digest prev = sha256(image.root_pk.serialize());
  for (size_t i = 0; i < image.partitions.size(); i++) {
    const BootPartition& p = image.partitions[i];
    if (p.name != BOOT_PARTITION_NAMES[i]) return {false, p.name};
    if (hmac_sha256(k_mac, p.ciphertext) != p.mac) return {false, p.name};
    if (!bls_verify(TAG_BOOT, image.root_pk, link_preimage(p.name, p.mac, prev), p.sig))
      return {false, p.name};
    prev = chain_digest(prev, p.mac);
  }
  return {true, ""};
}

std::optional<std::vector<Bytes>> decrypt_boot_image(const BootImage& image,
                                                     std::span<const uint8_t> k_enc) {
  if (image.partitions.size() != BOOT_PARTITION_NAMES.size()) return std::nullopt;
  std::vector<Bytes> out;
  for (size_t i = 0; i < image.partitions.size(); i++)
    out.push_back(aes_ctr(k_enc, boot_iv(uint32_t(i)), image.partitions[i].ciphertext));
  return out;
}

Bytes BootImage::serialize() const {
  ByteWriter w;
  w.str("BIMG");
  w.u8(1);
  auto pkb = root_pk.serialize();
  w.bytes(pkb);
  w.u8(uint8_t(partitions.size()));
  for (const auto& p : partitions) {
    w.u16(uint16_t(p.name.size()));
    w.str(p.name);
    w.u32(uint32_t(p.ciphertext.size()));
    w.bytes(p.ciphertext);
    w.bytes(p.mac);
    auto sig = p.sig.serialize();
    w.bytes(sig);
  }
  return w.buf;
}

std::optional<BootImage> BootImage::deserialize(std::span<const uint8_t> in) {
  ByteReader r{in};
  Bytes magic = r.take(4);
  if (magic != Bytes{'B', 'I', 'M', 'G'} || r.u8() != 1) return std::nullopt;
  BootImage image;
  Bytes pkb = r.take(64);
  auto pk = bn254::G2::deserialize(pkb);
  if (!pk) return std::nullopt;
  image.root_pk = *pk;
  uint8_t count = r.u8();
  for (uint8_t i = 0; i < count; i++) {
    BootPartition p;
    Bytes name = r.take(r.u16());
    p.name.assign(name.begin(), name.end());
    uint32_t clen = r.u32();
    if (clen > (1u << 28)) return std::nullopt;
    p.ciphertext = r.take(clen);
    Bytes mac = r.take(32);
    Bytes sig = r.take(32);
    if (r.fail) return std::nullopt;
    std::memcpy(p.mac.data(), mac.data(), 32);
    auto s = Signature::deserialize(sig);
    if (!s) return std::nullopt;
    p.sig = *s;
    image.partitions.push_back(std::move(p));
  }
  if (!r.done()) return std::nullopt;
  return image;
}

// ------------------------------------------------------------------- boot --

namespace {

template <typename Puf>
BootResult node_boot_impl(const BootImage& image, std::span<const uint8_t> k_mac, const Puf& puf,
                          const HelperData& w_sign, const HelperData& w_enc,
                          uint64_t readout_index) {
  auto chain = verify_boot_chain(image, k_mac);
  if (!chain.ok) return {std::nullopt, "boot_chain:" + chain.failed_partition};

  auto sk_material = rep(puf.sample(w_sign.challenge, readout_index), w_sign);
  auto ke_material = rep(puf.sample(w_enc.challenge, readout_index), w_enc);
  if (!sk_material || !ke_material) return {std::nullopt, "key_extraction"};

  CameraKeys keys;
  keys.sk = scalar_from_key(*sk_material);
  keys.pk = bn254::G2::generator() * keys.sk;
  keys.k_e = ke_material->bytes();
  keys.k_m = derive_mac_key(keys.k_e);
  return {keys, "ok"};
}

}  // namespace

BootResult node_boot(const BootImage& image, std::span<const uint8_t> k_mac, const RoPuf& puf,
                     const HelperData& w_sign, const HelperData& w_enc, uint64_t readout_index) {
  return node_boot_impl(image, k_mac, puf, w_sign, w_enc, readout_index);
}

BootResult node_boot(const BootImage& image, std::span<const uint8_t> k_mac, const SramPuf& puf,
                     const HelperData& w_sign, const HelperData& w_enc, uint64_t readout_index) {
  return node_boot_impl(image, k_mac, puf, w_sign, w_enc, readout_index);
}

}  // namespace pufsense::node
