#pragma once

#include <cstdint>
#include <memory>
#include <optional>

#include "pufsense/bits.hpp"

namespace pufsense {

struct CodeParams {
  enum class Family : uint8_t { rep = 0, rm_rep = 1, bch = 2 };

  Family family = Family::rep;
  uint16_t n = 0;
  uint16_t k = 0;
  uint16_t d = 0;

  uint16_t t() const { return uint16_t((d - 1) / 2); }

  /// Repetition (5,1,5), t=2. Small enough for exhaustive testing.
  static CodeParams rep5() { return {Family::rep, 5, 1, 5}; }
  /// Reed-Muller (16,5,8) concatenated with Repetition (5,1,5): composite
  /// (80,5,40). Decoded with per-group soft counts and a Hadamard-transform
  /// maximum-likelihood pass over the outer code.
  static CodeParams rm_rep80() { return {Family::rm_rep, 80, 5, 40}; }
  /// BCH (492,57,171), t=85: the (511,76) code with designed distance 171
  /// shortened by 19 bits.
  static CodeParams bch492() { return {Family::bch, 492, 57, 171}; }

  bool operator==(const CodeParams&) const = default;
};

class Codec {
 public:
  virtual ~Codec() = default;
  virtual const CodeParams& params() const = 0;
  /// k message bits -> n codeword bits.
  virtual BitVec encode(const BitVec& message) const = 0;
  /// n received bits -> k message bits, or nullopt past the code's capacity.
  virtual std::optional<BitVec> decode(const BitVec& word) const = 0;
};

std::unique_ptr<Codec> make_codec(const CodeParams& params);

}  // namespace pufsense
