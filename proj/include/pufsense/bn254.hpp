#pragma once

// Pairing-friendly curve backend: the 254-bit Barreto-Naehrig curve
// y^2 = x^3 + 3 over Fp (the curve commonly known as alt_bn128), with the
// sextic D-twist y^2 = x^3 + 3/(9+u) over Fp2 hosting G2 and the optimal ate
// pairing into Fp12. Self-contained: 4x64-limb Montgomery arithmetic, no
// external bignum dependency.

#include <array>
#include <cstdint>
#include <cstring>
#include <optional>
#include <span>
#include <string_view>

#include "pufsense/crypto_util.hpp"
#include "pufsense/rng.hpp"

namespace pufsense::bn254 {

using u64 = uint64_t;
using u128 = unsigned __int128;

namespace detail {

struct FpParams {
  // p = 21888242871839275222246405745257275088696311157297823662689037894645226208583
  static constexpr u64 MOD[4] = {0x3c208c16d87cfd47ull, 0x97816a916871ca8dull,
                                 0xb85045b68181585dull, 0x30644e72e131a029ull};
  static constexpr u64 R1[4] = {0xd35d438dc58f0d9dull, 0x0a78eb28f5c70b3dull,
                                0x666ea36f7879462cull, 0x0e0a77c19a07df2full};
  static constexpr u64 R2[4] = {0xf32cfc5b538afa89ull, 0xb5e71911d44501fbull,
                                0x47ab1eff0a417ff6ull, 0x06d89f71cab8351full};
  static constexpr u64 INV = 0x87d20782e4866389ull;
};

struct FrParams {
  // r = 21888242871839275222246405745257275088548364400416034343698204186575808495617
  static constexpr u64 MOD[4] = {0x43e1f593f0000001ull, 0x2833e84879b97091ull,
                                 0xb85045b68181585dull, 0x30644e72e131a029ull};
  static constexpr u64 R1[4] = {0xac96341c4ffffffbull, 0x36fc76959f60cd29ull,
                                0x666ea36f7879462eull, 0x0e0a77c19a07df2full};
  static constexpr u64 R2[4] = {0x1bb8e645ae216da7ull, 0x53fe3ab1e35c59e3ull,
                                0x8c49833d53bb8085ull, 0x0216d0b17f4e44a5ull};
  static constexpr u64 INV = 0xc2e1f593efffffffull;
};

inline int cmp4(const u64* a, const u64* b) {
  for (int i = 3; i >= 0; i--) {
    if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
  }
  return 0;
}

/// Prime field element in Montgomery representation.
template <typename P>
struct Field {
  u64 v[4] = {0, 0, 0, 0};

  static constexpr Field zero() { return Field{}; }
  static Field one() {
    Field f;
    std::memcpy(f.v, P::R1, sizeof(f.v));
    return f;
  }

  static Field from_u64(u64 x) {
    Field f;
    f.v[0] = x;
    return f.to_mont();
  }

  /// Big-endian 32-byte input, reduced mod the field order.
  static Field from_bytes_mod(std::span<const uint8_t> be) {
    u64 raw[4] = {0, 0, 0, 0};
    size_t n = be.size() < 32 ? be.size() : 32;
    // right-align into little-endian limbs
    for (size_t i = 0; i < n; i++) {
      size_t bit = (n - 1 - i) * 8;
      raw[bit / 64] |= u64(be[be.size() - n + i]) << (bit % 64);
    }
    while (cmp4(raw, P::MOD) >= 0) sub_raw(raw, P::MOD);
    Field f;
    std::memcpy(f.v, raw, sizeof(raw));
    return f.to_mont();
  }

  /// Strict canonical parse: fails if the value is >= the modulus.
  static std::optional<Field> from_bytes_checked(std::span<const uint8_t, 32> be) {
    u64 raw[4] = {0, 0, 0, 0};
    for (size_t i = 0; i < 32; i++) raw[(31 - i) / 8] |= u64(be[i]) << (((31 - i) % 8) * 8);
    if (cmp4(raw, P::MOD) >= 0) return std::nullopt;
    Field f;
    std::memcpy(f.v, raw, sizeof(raw));
    return f.to_mont();
  }

  std::array<uint8_t, 32> to_bytes() const {
    Field c = from_mont();
    std::array<uint8_t, 32> out{};
    for (size_t i = 0; i < 32; i++) out[i] = uint8_t(c.v[(31 - i) / 8] >> (((31 - i) % 8) * 8));
    return out;
  }

  bool is_zero() const { return (v[0] | v[1] | v[2] | v[3]) == 0; }
  bool operator==(const Field& o) const { return cmp4(v, o.v) == 0; }
  bool operator!=(const Field& o) const { return !(*this == o); }

  /// Low bit of the canonical (non-Montgomery) representation.
  bool parity() const { return from_mont().v[0] & 1; }

  Field operator+(const Field& o) const {
    Field r;
    u64 carry = 0;
    for (int i = 0; i < 4; i++) {
      u128 c = (u128)v[i] + o.v[i] + carry;
      r.v[i] = (u64)c;
      carry = (u64)(c >> 64);
    }
    if (carry || cmp4(r.v, P::MOD) >= 0) sub_raw(r.v, P::MOD);
    return r;
  }

  Field operator-(const Field& o) const {
    Field r;
    int64_t borrow = 0;
    for (int i = 0; i < 4; i++) {
      u128 lhs = (u128)v[i];
      u128 rhs = (u128)o.v[i] + (borrow ? 1 : 0);
      if (lhs >= rhs) {
        r.v[i] = (u64)(lhs - rhs);
        borrow = 0;
      } else {
        r.v[i] = (u64)((((u128)1 << 64) + lhs) - rhs);
        borrow = 1;
      }
    }
    if (borrow) add_raw(r.v, P::MOD);
    return r;
  }

  Field neg() const { return is_zero() ? *this : zero() - *this; }

  Field operator*(const Field& o) const {
    Field r;
    mont_mul(r.v, v, o.v);
    return r;
  }
  Field sqr() const { return *this * *this; }
  Field dbl() const { return *this + *this; }

  Field pow(std::span<const u64> exp) const {
    Field result = one();
    bool started = false;
    for (size_t i = exp.size(); i-- > 0;) {
      for (int b = 63; b >= 0; b--) {
        if (started) result = result.sqr();
        if ((exp[i] >> b) & 1) {
          if (started)
            result = result * *this;
          else {
            result = *this;
            started = true;
          }
        }
      }
    }
    return started ? result : one();
  }

  Field inv() const {
    if (is_zero()) return *this;
    // binary xgcd on the raw representation; two to_mont hops restore the
    // Montgomery factor: binGCD(aR) = a^-1 R^-1, then * R^2 * R^2 / R / R.
    Field r;
    bin_inv(r.v, v);
    return r.to_mont().to_mont();
  }

 private:
  static void bin_inv(u64* out, const u64* a) {
    u64 u[4], w[4], x1[4] = {1, 0, 0, 0}, x2[4] = {0, 0, 0, 0};
    std::memcpy(u, a, sizeof(u));
    std::memcpy(w, P::MOD, sizeof(w));
    auto is_one = [](const u64* t) { return t[0] == 1 && !t[1] && !t[2] && !t[3]; };
    auto halve = [](u64* t) {
      u64 extra = 0;
      if (t[0] & 1) extra = add_carry(t, P::MOD);
      for (int i = 0; i < 4; i++) {
        t[i] >>= 1;
        u64 hi = (i < 3) ? t[i + 1] : extra;
        t[i] |= hi << 63;
      }
    };
    while (!is_one(u) && !is_one(w)) {
      while (!(u[0] & 1)) {
        shr1(u);
        halve(x1);
      }
      while (!(w[0] & 1)) {
        shr1(w);
        halve(x2);
      }
      if (cmp4(u, w) >= 0) {
        sub_raw(u, w);
        mod_sub(x1, x2);
      } else {
        sub_raw(w, u);
        mod_sub(x2, x1);
      }
    }
    std::memcpy(out, is_one(u) ? x1 : x2, 4 * sizeof(u64));
  }

  static void shr1(u64* t) {
    for (int i = 0; i < 4; i++) {
      t[i] >>= 1;
      if (i < 3) t[i] |= t[i + 1] << 63;
    }
  }
  static u64 add_carry(u64* a, const u64* b) {
    u64 carry = 0;
    for (int i = 0; i < 4; i++) {
      u128 c = (u128)a[i] + b[i] + carry;
      a[i] = (u64)c;
      carry = (u64)(c >> 64);
    }
    return carry;
  }
  static void mod_sub(u64* a, const u64* b) {
    if (cmp4(a, b) >= 0)
      sub_raw(a, b);
    else {
      add_carry(a, P::MOD);
      sub_raw(a, b);
    }
  }

  Field to_mont() const {
    Field r;
    mont_mul(r.v, v, P::R2);
    return r;
  }
  Field from_mont() const {
    static constexpr u64 ONE_RAW[4] = {1, 0, 0, 0};
    Field r;
    mont_mul(r.v, v, ONE_RAW);
    return r;
  }

  static void add_raw(u64* a, const u64* b) {
    u64 carry = 0;
    for (int i = 0; i < 4; i++) {
      u128 c = (u128)a[i] + b[i] + carry;
      a[i] = (u64)c;
      carry = (u64)(c >> 64);
    }
  }
  static void sub_raw(u64* a, const u64* b) {
    int borrow = 0;
    for (int i = 0; i < 4; i++) {
      u128 lhs = (u128)a[i];
      u128 rhs = (u128)b[i] + borrow;
      if (lhs >= rhs) {
        a[i] = (u64)(lhs - rhs);
        borrow = 0;
      } else {
        a[i] = (u64)((((u128)1 << 64) + lhs) - rhs);
        borrow = 1;
      }
    }
  }
  static void sub_small(u64* a, u64 x) {
    for (int i = 0; i < 4 && x; i++) {
      u64 old = a[i];
      a[i] -= x;
      x = a[i] > old ? 1 : 0;
    }
  }

  // CIOS Montgomery multiplication (Koc-Acar), 4 limbs.
  static void mont_mul(u64* out, const u64* a, const u64* b) {
    u64 T[6] = {0, 0, 0, 0, 0, 0};
    for (int i = 0; i < 4; i++) {
      u64 carry = 0;
      for (int j = 0; j < 4; j++) {
        u128 cur = (u128)a[j] * b[i] + T[j] + carry;
        T[j] = (u64)cur;
        carry = (u64)(cur >> 64);
      }
      u128 cur = (u128)T[4] + carry;
      T[4] = (u64)cur;
      T[5] += (u64)(cur >> 64);

      u64 m = T[0] * P::INV;
      u128 c0 = (u128)m * P::MOD[0] + T[0];
      carry = (u64)(c0 >> 64);
      for (int j = 1; j < 4; j++) {
        u128 c = (u128)m * P::MOD[j] + T[j] + carry;
        T[j - 1] = (u64)c;
        carry = (u64)(c >> 64);
      }
      u128 c4 = (u128)T[4] + carry;
      T[3] = (u64)c4;
      T[4] = T[5] + (u64)(c4 >> 64);
      T[5] = 0;
    }
    if (T[4] || cmp4(T, P::MOD) >= 0) sub_raw(T, P::MOD);
    std::memcpy(out, T, 4 * sizeof(u64));
  }
};

}  // namespace detail

using Fp = detail::Field<detail::FpParams>;
using Fr = detail::Field<detail::FrParams>;

/// Uniform scalar via rejection sampling from a deterministic stream.
Fr random_fr(Rng& rng);
Fr fr_from_hash(std::span<const uint8_t> bytes);

// ---------------------------------------------------------------- Fp2 ------

/// Fp2 = Fp[u] / (u^2 + 1)
struct Fp2 {
  Fp c0, c1;

  static Fp2 zero() { return {}; }
  static Fp2 one() { return {Fp::one(), Fp::zero()}; }
  bool is_zero() const { return c0.is_zero() && c1.is_zero(); }
  bool operator==(const Fp2& o) const { return c0 == o.c0 && c1 == o.c1; }
  bool operator!=(const Fp2& o) const { return !(*this == o); }

  Fp2 operator+(const Fp2& o) const { return {c0 + o.c0, c1 + o.c1}; }
  Fp2 operator-(const Fp2& o) const { return {c0 - o.c0, c1 - o.c1}; }
  Fp2 neg() const { return {c0.neg(), c1.neg()}; }
  Fp2 dbl() const { return {c0.dbl(), c1.dbl()}; }
  Fp2 conj() const { return {c0, c1.neg()}; }

  Fp2 operator*(const Fp2& o) const {
    Fp v0 = c0 * o.c0;
    Fp v1 = c1 * o.c1;
    Fp s = (c0 + c1) * (o.c0 + o.c1);
    return {v0 - v1, s - v0 - v1};
  }
  Fp2 mul_fp(const Fp& s) const { return {c0 * s, c1 * s}; }
  Fp2 sqr() const {
    Fp a = c0 + c1;
    Fp b = c0 - c1;
    Fp ab = c0 * c1;
    return {a * b, ab.dbl()};
  }
  /// Multiply by the sextic non-residue xi = 9 + u.
  Fp2 mul_xi() const {
    Fp nine_c0 = c0.dbl().dbl().dbl() + c0;
    Fp nine_c1 = c1.dbl().dbl().dbl() + c1;
    return {nine_c0 - c1, nine_c1 + c0};
  }
  Fp2 inv() const {
    Fp n = (c0.sqr() + c1.sqr()).inv();
    return {c0 * n, (c1 * n).neg()};
  }
  Fp2 pow(std::span<const u64> exp) const {
    Fp2 result = one();
    for (size_t i = exp.size(); i-- > 0;)
      for (int b = 63; b >= 0; b--) {
        result = result.sqr();
        if ((exp[i] >> b) & 1) result = result * *this;
      }
    return result;
  }
};

// ---------------------------------------------------------------- Fp6 ------

/// Fp6 = Fp2[v] / (v^3 - xi)
struct Fp6 {
  Fp2 c0, c1, c2;

  static Fp6 zero() { return {}; }
  static Fp6 one() { return {Fp2::one(), Fp2::zero(), Fp2::zero()}; }
  bool is_zero() const { return c0.is_zero() && c1.is_zero() && c2.is_zero(); }
  bool operator==(const Fp6& o) const { return c0 == o.c0 && c1 == o.c1 && c2 == o.c2; }

  Fp6 operator+(const Fp6& o) const { return {c0 + o.c0, c1 + o.c1, c2 + o.c2}; }
  Fp6 operator-(const Fp6& o) const { return {c0 - o.c0, c1 - o.c1, c2 - o.c2}; }
  Fp6 neg() const { return {c0.neg(), c1.neg(), c2.neg()}; }

  Fp6 operator*(const Fp6& o) const {
    Fp2 v0 = c0 * o.c0;
    Fp2 v1 = c1 * o.c1;
    Fp2 v2 = c2 * o.c2;
    Fp2 t0 = ((c1 + c2) * (o.c1 + o.c2) - v1 - v2).mul_xi() + v0;
    Fp2 t1 = (c0 + c1) * (o.c0 + o.c1) - v0 - v1 + v2.mul_xi();
    Fp2 t2 = (c0 + c2) * (o.c0 + o.c2) - v0 + v1 - v2;
    return {t0, t1, t2};
  }
  Fp6 sqr() const { return *this * *this; }
  Fp6 mul_fp2(const Fp2& s) const { return {c0 * s, c1 * s, c2 * s}; }

  /// Multiply by v (cyclic shift with xi correction).
  Fp6 mul_v() const { return {c2.mul_xi(), c0, c1}; }

  Fp6 inv() const {
    Fp2 a = c0.sqr() - (c1 * c2).mul_xi();
    Fp2 b = c2.sqr().mul_xi() - c0 * c1;
    Fp2 c = c1.sqr() - c0 * c2;
    Fp2 t = ((c2 * b + c1 * c) .mul_xi() + c0 * a).inv();
    return {a * t, b * t, c * t};
  }
};

// --------------------------------------------------------------- Fp12 ------

/// Fp12 = Fp6[w] / (w^2 - v)
struct Fp12 {
  Fp6 c0, c1;

  static Fp12 one() { return {Fp6::one(), Fp6::zero()}; }
  static Fp12 zero() { return {}; }
  bool operator==(const Fp12& o) const { return c0 == o.c0 && c1 == o.c1; }
  bool operator!=(const Fp12& o) const { return !(*this == o); }
  bool is_one() const { return *this == one(); }

  Fp12 operator*(const Fp12& o) const {
    Fp6 v0 = c0 * o.c0;
    Fp6 v1 = c1 * o.c1;
    Fp6 t = (c0 + c1) * (o.c0 + o.c1) - v0 - v1;
    return {v0 + v1.mul_v(), t};
  }
  Fp12 sqr() const {
    Fp6 ab = c0 * c1;
    Fp6 t = (c0 + c1) * (c0 + c1.mul_v()) - ab - ab.mul_v();
    return {t, ab + ab};
  }
  /// Frobenius^6: w -> -w.
  Fp12 conj() const { return {c0, c1.neg()}; }
  Fp12 inv() const {
    Fp6 t = (c0.sqr() - c1.sqr().mul_v()).inv();
    return {c0 * t, (c1 * t).neg()};
  }
  Fp12 pow(std::span<const u64> exp) const {
    Fp12 result = one();
    for (size_t i = exp.size(); i-- > 0;)
      for (int b = 63; b >= 0; b--) {
        result = result.sqr();
        if ((exp[i] >> b) & 1) result = result * *this;
      }
    return result;
  }
  Fp12 frobenius() const;  // x -> x^p

  /// Squaring valid only in the cyclotomic subgroup (after the easy part of
  /// the final exponentiation).
  Fp12 cyclotomic_sqr() const;

  std::array<uint8_t, 384> to_bytes() const;
};

using Gt = Fp12;

// --------------------------------------------------------------- curves ----

/// Jacobian-coordinate point over coordinate field F; infinity iff z == 0.
template <typename F>
struct Point {
  F x, y, z;  // default: (0,0,0) = infinity

  static Point infinity() { return {}; }
  bool is_infinity() const { return z.is_zero(); }

  static Point from_affine(const F& ax, const F& ay) { return {ax, ay, F::one()}; }

  Point dbl() const {
    if (is_infinity()) return *this;
    F a = x.sqr();
    F b = y.sqr();
    F c = b.sqr();
    F d = ((x + b).sqr() - a - c).dbl();
    F e = a.dbl() + a;
    F f = e.sqr();
    Point r;
    r.x = f - d.dbl();
    r.y = e * (d - r.x) - c.dbl().dbl().dbl();
    r.z = (y * z).dbl();
    return r;
  }

  Point add(const Point& o) const {
    if (is_infinity()) return o;
    if (o.is_infinity()) return *this;
    F z1z1 = z.sqr();
    F z2z2 = o.z.sqr();
    F u1 = x * z2z2;
    F u2 = o.x * z1z1;
    F s1 = y * o.z * z2z2;
    F s2 = o.y * z * z1z1;
    F h = u2 - u1;
    F rr = (s2 - s1).dbl();
    if (h.is_zero()) {
      if (rr.is_zero()) return dbl();
      return infinity();
    }
    F i = h.dbl().sqr();
    F j = h * i;
    F v = u1 * i;
    Point r;
    r.x = rr.sqr() - j - v.dbl();
    r.y = rr * (v - r.x) - (s1 * j).dbl();
    r.z = ((z + o.z).sqr() - z1z1 - z2z2) * h;
    return r;
  }

  Point neg() const {
    if (is_infinity()) return *this;
    return {x, y.neg(), z};
  }

  /// Double-and-add over explicit big-endian scalar bytes.
  Point mul_bytes(std::span<const uint8_t> scalar_be) const {
    Point acc = infinity();
    for (uint8_t byte : scalar_be)
      for (int b = 7; b >= 0; b--) {
        acc = acc.dbl();
        if ((byte >> b) & 1) acc = acc.add(*this);
      }
    return acc;
  }
  Point mul(const Fr& k) const {
    auto be = k.to_bytes();
    return mul_bytes(be);
  }

  void to_affine(F& ax, F& ay) const {
    F zi = z.inv();
    F zi2 = zi.sqr();
    ax = x * zi2;
    ay = y * zi2 * zi;
  }

  bool eq(const Point& o) const {
    if (is_infinity() || o.is_infinity()) return is_infinity() == o.is_infinity();
    F z1z1 = z.sqr();
    F z2z2 = o.z.sqr();
    if (!(x * z2z2 == o.x * z1z1)) return false;
    return y * o.z * z2z2 == o.y * z * z1z1;
  }
};

struct G1 : Point<Fp> {
  G1() = default;
  G1(const Point<Fp>& p) : Point<Fp>(p) {}

  static G1 generator();  // (1, 2)
  bool on_curve() const;

  std::array<uint8_t, 32> serialize() const;
  static std::optional<G1> deserialize(std::span<const uint8_t> in);
};

struct G2 : Point<Fp2> {
  G2() = default;
  G2(const Point<Fp2>& p) : Point<Fp2>(p) {}

  static G2 generator();
  bool on_curve() const;
  bool in_subgroup() const;  // full order-r check

  std::array<uint8_t, 64> serialize() const;
  static std::optional<G2> deserialize(std::span<const uint8_t> in);
};

inline G1 operator*(const G1& p, const Fr& k) { return G1(p.mul(k)); }
inline G2 operator*(const G2& p, const Fr& k) { return G2(p.mul(k)); }
inline G1 operator+(const G1& a, const G1& b) { return G1(a.add(b)); }
inline G2 operator+(const G2& a, const G2& b) { return G2(a.add(b)); }

// -------------------------------------------------------------- pairing ----

/// Miller loop of the optimal ate pairing; result still needs final_exp.
Fp12 miller_loop(const G1& p, const G2& q);
Gt final_exp(const Fp12& f);
inline Gt pairing(const G1& p, const G2& q) { return final_exp(miller_loop(p, q)); }

/// Product-of-pairings accumulator: one shared final exponentiation.
class PairingProduct {
 public:
  void add(const G1& p, const G2& q) { acc_ = acc_ * miller_loop(p, q); }
  Gt result() const { return final_exp(acc_); }

 private:
  Fp12 acc_ = Fp12::one();
};

/// Deterministic domain-separated hash to G1 (try-and-increment).
G1 hash_to_g1(std::string_view domain_tag, std::span<const uint8_t> msg);

std::optional<Fp> sqrt_fp(const Fp& a);
std::optional<Fp2> sqrt_fp2(const Fp2& a);

}  // namespace pufsense::bn254
