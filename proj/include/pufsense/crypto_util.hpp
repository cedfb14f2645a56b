#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pufsense {

using Digest = std::array<uint8_t, 32>;
using Bytes = std::vector<uint8_t>;

Digest sha256(std::span<const uint8_t> data);
Digest hmac_sha256(std::span<const uint8_t> key, std::span<const uint8_t> data);

/// AES-CTR keystream XOR; key must be 16 (AES-128) or 32 (AES-256) bytes.
/// Encryption and decryption are the same operation.
Bytes aes_ctr(std::span<const uint8_t> key, const std::array<uint8_t, 16>& iv,
              std::span<const uint8_t> data);

std::string to_hex(std::span<const uint8_t> data);
Bytes from_hex(std::string_view hex);

inline std::span<const uint8_t> as_bytes(std::string_view s) {
  return {reinterpret_cast<const uint8_t*>(s.data()), s.size()};
}

/// Append-style big-endian serializer used by the wire formats.
struct ByteWriter {
  Bytes buf;
  void u8(uint8_t v) { buf.push_back(v); }
  void u16(uint16_t v) {
    buf.push_back(uint8_t(v >> 8));
    buf.push_back(uint8_t(v));
  }
  void u32(uint32_t v) {
    for (int i = 3; i >= 0; i--) buf.push_back(uint8_t(v >> (8 * i)));
  }
  void u64(uint64_t v) {
    for (int i = 7; i >= 0; i--) buf.push_back(uint8_t(v >> (8 * i)));
  }
  void bytes(std::span<const uint8_t> b) { buf.insert(buf.end(), b.data(), b.data() + b.size()); }
  void str(std::string_view s) { bytes(as_bytes(s)); }
};

struct ByteReader {
  std::span<const uint8_t> buf;
  size_t pos = 0;
  bool fail = false;

  bool need(size_t n) {
    if (pos + n > buf.size()) {
      fail = true;
      return false;
    }
    return true;
  }
  uint8_t u8() {
    if (!need(1)) return 0;
    return buf[pos++];
  }
  uint16_t u16() {
    if (!need(2)) return 0;
    uint16_t v = uint16_t(buf[pos]) << 8 | buf[pos + 1];
    pos += 2;
    return v;
  }
  uint32_t u32() {
    if (!need(4)) return 0;
    uint32_t v = 0;
    for (int i = 0; i < 4; i++) v = v << 8 | buf[pos + i];
    pos += 4;
    return v;
  }
  uint64_t u64() {
    if (!need(8)) return 0;
    uint64_t v = 0;
    for (int i = 0; i < 8; i++) v = v << 8 | buf[pos + i];
    pos += 8;
    return v;
  }
  Bytes take(size_t n) {
    if (!need(n)) return {};
    Bytes out(buf.begin() + pos, buf.begin() + pos + n);
    pos += n;
    return out;
  }
  bool done() const { return !fail && pos == buf.size(); }
};

}  // namespace pufsense
