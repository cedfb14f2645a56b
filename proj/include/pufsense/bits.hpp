#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pufsense {

/// Unpacked bit vector. One byte per bit internally; packing to MSB-first
/// byte streams is provided for file formats.
class BitVec {
 public:
  BitVec() = default;
  explicit BitVec(size_t n, uint8_t fill = 0) : bits_(n, fill ? 1 : 0) {}

  static BitVec from_string(std::string_view s) {
    BitVec v;
    v.bits_.reserve(s.size());
    for (char c : s) {
      if (c == '0')
        v.bits_.push_back(0);
      else if (c == '1')
        v.bits_.push_back(1);
      else
        throw std::invalid_argument("BitVec: expected '0'/'1'");
    }
    return v;
  }

  // MSB-first unpacking of the leading n_bits of a byte stream.
  static BitVec from_packed(std::span<const uint8_t> bytes, size_t n_bits) {
    if (n_bits > bytes.size() * 8)
      throw std::invalid_argument("BitVec: packed buffer too short");
    BitVec v(n_bits);
    for (size_t i = 0; i < n_bits; i++)
      v.bits_[i] = (bytes[i / 8] >> (7 - i % 8)) & 1;
    return v;
  }

  size_t size() const { return bits_.size(); }
  bool empty() const { return bits_.empty(); }
  uint8_t operator[](size_t i) const { return bits_[i]; }
  void set(size_t i, bool b) { bits_[i] = b ? 1 : 0; }
  void flip(size_t i) { bits_[i] ^= 1; }
  void push_back(bool b) { bits_.push_back(b ? 1 : 0); }

  void append(const BitVec& other) {
    bits_.insert(bits_.end(), other.bits_.begin(), other.bits_.end());
  }

  BitVec slice(size_t pos, size_t len) const {
    if (pos + len > bits_.size()) throw std::out_of_range("BitVec::slice");
    BitVec v;
    v.bits_.assign(bits_.begin() + pos, bits_.begin() + pos + len);
    return v;
  }

  BitVec& operator^=(const BitVec& rhs) {
    if (rhs.size() != size()) throw std::invalid_argument("BitVec: xor length mismatch");
    for (size_t i = 0; i < bits_.size(); i++) bits_[i] ^= rhs.bits_[i];
    return *this;
  }
  friend BitVec operator^(BitVec a, const BitVec& b) { return a ^= b; }

  BitVec complement() const {
    BitVec v = *this;
    for (auto& b : v.bits_) b ^= 1;
    return v;
  }

  size_t count_ones() const {
    size_t n = 0;
    for (uint8_t b : bits_) n += b;
    return n;
  }

  static size_t hamming(const BitVec& a, const BitVec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("BitVec: hamming length mismatch");
    size_t n = 0;
    for (size_t i = 0; i < a.size(); i++) n += a.bits_[i] ^ b.bits_[i];
    return n;
  }

  std::string to_string() const {
    std::string s(bits_.size(), '0');
    for (size_t i = 0; i < bits_.size(); i++)
      if (bits_[i]) s[i] = '1';
    return s;
  }

  // MSB-first packing; trailing bits of the last byte are zero.
  std::vector<uint8_t> packed() const {
    std::vector<uint8_t> out((bits_.size() + 7) / 8, 0);
    for (size_t i = 0; i < bits_.size(); i++)
      if (bits_[i]) out[i / 8] |= uint8_t(1u << (7 - i % 8));
    return out;
  }

  bool operator==(const BitVec&) const = default;

 private:
  std::vector<uint8_t> bits_;
};

}  // namespace pufsense
