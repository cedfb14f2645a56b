#include "pufsense/crypto_util.hpp"

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <stdexcept>

namespace pufsense {

Digest sha256(std::span<const uint8_t> data) {
  Digest out{};
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx, out.data(), &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("sha256 failed");
  }
  EVP_MD_CTX_free(ctx);
  return out;
}

Digest hmac_sha256(std::span<const uint8_t> key, std::span<const uint8_t> data) {
  Digest out{};
  unsigned int len = 0;
  if (!HMAC(EVP_sha256(), key.data(), int(key.size()), data.data(), data.size(), out.data(),
            &len) ||
      len != out.size())
    throw std::runtime_error("hmac-sha256 failed");
  return out;
}

Bytes aes_ctr(std::span<const uint8_t> key, const std::array<uint8_t, 16>& iv,
              std::span<const uint8_t> data) {
  const EVP_CIPHER* cipher = nullptr;
  if (key.size() == 16)
    cipher = EVP_aes_128_ctr();
  else if (key.size() == 32)
    cipher = EVP_aes_256_ctr();
  else
    throw std::invalid_argument("aes_ctr: key must be 16 or 32 bytes");

  Bytes out(data.size());
  int len1 = 0, len2 = 0;
  EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
  if (!ctx || EVP_EncryptInit_ex(ctx, cipher, nullptr, key.data(), iv.data()) != 1 ||
      (data.size() &&
       EVP_EncryptUpdate(ctx, out.data(), &len1, data.data(), int(data.size())) != 1) ||
      EVP_EncryptFinal_ex(ctx, out.data() + len1, &len2) != 1) {
    EVP_CIPHER_CTX_free(ctx);
    throw std::runtime_error("aes_ctr failed");
  }
  EVP_CIPHER_CTX_free(ctx);
  return out;
}

std::string to_hex(std::span<const uint8_t> data) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  s.reserve(data.size() * 2);
  for (uint8_t b : data) {
    s.push_back(digits[b >> 4]);
    s.push_back(digits[b & 0xf]);
  }
  return s;
}

Bytes from_hex(std::string_view hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  if (hex.size() % 2) throw std::invalid_argument("from_hex: odd length");
  Bytes out(hex.size() / 2);
  for (size_t i = 0; i < out.size(); i++) {
    int hi = nibble(hex[2 * i]), lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw std::invalid_argument("from_hex: bad digit");
    out[i] = uint8_t(hi << 4 | lo);
  }
  return out;
}

}  // namespace pufsense
