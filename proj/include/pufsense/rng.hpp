#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string_view>

namespace pufsense {

/// Deterministic xoshiro256** generator with hand-rolled distributions.
/// Standard-library distributions are implementation-defined, which would
/// break seed-stable outputs across toolchains, so the few distributions we
/// need are implemented here.
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    // splitmix64 expansion of the seed into the xoshiro state
    uint64_t x = seed;
    for (auto& s : s_) {
      x += 0x9e3779b97f4a7c15ull;
      uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
      s = z ^ (z >> 31);
    }
  }

  /// Independent substream identified by a label, e.g. rng.child("noise").
  Rng child(std::string_view tag) const {
    uint64_t h = 0xcbf29ce484222325ull;
    for (char c : tag) h = (h ^ uint8_t(c)) * 0x100000001b3ull;
    for (uint64_t s : s_) h = (h ^ s) * 0x100000001b3ull;
    return Rng(h);
  }
  Rng child(uint64_t n) const {
    uint64_t h = 0xcbf29ce484222325ull;
    h = (h ^ n) * 0x100000001b3ull;
    for (uint64_t s : s_) h = (h ^ s) * 0x100000001b3ull;
    return Rng(h);
  }

  uint64_t next_u64() {
    uint64_t result = rotl(s_[1] * 5, 7) * 9;
    uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform in [0,1) with 53-bit resolution.
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  uint64_t below(uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below(0)");
    uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % n;
  }

  double normal(double mean, double sd) {
    // Box-Muller; one variate per pair of uniforms keeps the stream position
    // independent of earlier draws.
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    return mean + sd * z;
  }

  /// Marsaglia-Tsang for shape >= 1, boosted below 1.
  double gamma(double shape) {
    if (shape <= 0) throw std::invalid_argument("Rng::gamma: shape <= 0");
    if (shape < 1.0) {
      double u = uniform();
      while (u <= 0.0) u = uniform();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal(0.0, 1.0);
      double v = 1.0 + c * x;
      if (v <= 0) continue;
      v = v * v * v;
      double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (u > 0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double beta(double a, double b) {
    double x = gamma(a);
    double y = gamma(b);
    return x / (x + y);
  }

  void fill_bytes(std::span<uint8_t> out) {
    size_t i = 0;
    while (i < out.size()) {
      uint64_t v = next_u64();
      for (int k = 0; k < 8 && i < out.size(); k++, i++) out[i] = uint8_t(v >> (8 * k));
    }
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  uint64_t s_[4];
};

}  // namespace pufsense
