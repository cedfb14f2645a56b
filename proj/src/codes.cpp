#include "pufsense/codes.hpp"

#include <array>
#include <cstdlib>
#include <stdexcept>
#include <vector>

namespace pufsense {

namespace {

// ------------------------------------------------------------ repetition --

class RepCodec : public Codec {
 public:
  explicit RepCodec(const CodeParams& p) : params_(p) {
    if (p.k != 1 || p.n != p.d || p.n % 2 == 0)
      throw std::invalid_argument("RepCodec: expected odd (n,1,n)");
  }
  const CodeParams& params() const override { return params_; }

  BitVec encode(const BitVec& message) const override {
    if (message.size() != 1) throw std::invalid_argument("RepCodec: message must be 1 bit");
    return BitVec(params_.n, message[0]);
  }

  std::optional<BitVec> decode(const BitVec& word) const override {
    if (word.size() != params_.n) return std::nullopt;
    BitVec m(1);
    m.set(0, word.count_ones() * 2 > params_.n);
    return m;
  }

 private:
  CodeParams params_;
};

// --------------------------------------------------- RM(16,5,8) || Rep(5) --

constexpr int RM_N = 16;
constexpr int RM_K = 5;
constexpr int REP = 5;

// First-order Reed-Muller RM(1,4): bit at point x is m0 xor <m1..m4, x>.
BitVec rm16_encode(const BitVec& m) {
  BitVec out(RM_N);
  for (int x = 0; x < RM_N; x++) {
    int b = m[0];
    for (int j = 0; j < 4; j++)
      if ((x >> j) & 1) b ^= m[j + 1];
    out.set(x, b);
  }
  return out;
}

class RmRepCodec : public Codec {
 public:
  explicit RmRepCodec(const CodeParams& p) : params_(p) {
    if (p.n != RM_N * REP || p.k != RM_K)
      throw std::invalid_argument("RmRepCodec: expected (80,5,40)");
  }
  const CodeParams& params() const override { return params_; }

  BitVec encode(const BitVec& message) const override {
    if (message.size() != RM_K) throw std::invalid_argument("RmRepCodec: message must be 5 bits");
    BitVec inner = rm16_encode(message);
    BitVec out;
    for (int i = 0; i < RM_N; i++)
      for (int r = 0; r < REP; r++) out.push_back(inner[i]);
    return out;
  }

  std::optional<BitVec> decode(const BitVec& word) const override {
    if (word.size() != size_t(RM_N * REP)) return std::nullopt;
    // repetition groups become soft reliabilities in [-5, 5]
    int s[RM_N];
    for (int i = 0; i < RM_N; i++) {
      int ones = 0;
      for (int r = 0; r < REP; r++) ones += word[i * REP + r];
      s[i] = REP - 2 * ones;
    }
    // fast Hadamard transform = correlation with every affine candidate
    int t[RM_N];
    std::copy(s, s + RM_N, t);
    for (int len = 1; len < RM_N; len <<= 1)
      for (int i = 0; i < RM_N; i += len << 1)
        for (int j = i; j < i + len; j++) {
          int a = t[j], b = t[j + len];
          t[j] = a + b;
          t[j + len] = a - b;
        }
    int best = 0;
    for (int j = 1; j < RM_N; j++)
      if (std::abs(t[j]) > std::abs(t[best])) best = j;
    BitVec m(RM_K);
    m.set(0, t[best] < 0);
    for (int j = 0; j < 4; j++) m.set(j + 1, (best >> j) & 1);
    return m;
  }

 private:
  CodeParams params_;
};

// ------------------------------------------------------------------- BCH --

// GF(2^9), primitive polynomial x^9 + x^4 + 1.
class Gf512 {
 public:
  static constexpr int ORDER = 511;

  Gf512() {
    int x = 1;
    for (int i = 0; i < ORDER; i++) {
      exp_[i] = x;
      log_[x] = i;
      x <<= 1;
      if (x & 0x200) x ^= 0x211;
    }
    for (int i = ORDER; i < 2 * ORDER; i++) exp_[i] = exp_[i - ORDER];
  }

  int mul(int a, int b) const {
    if (a == 0 || b == 0) return 0;
    return exp_[log_[a] + log_[b]];
  }
  int inv(int a) const { return exp_[ORDER - log_[a]]; }
  int alpha_pow(int e) const { return exp_[((e % ORDER) + ORDER) % ORDER]; }
  int log(int a) const { return log_[a]; }

 private:
  int exp_[2 * ORDER];
  int log_[512] = {};
};

const Gf512& gf() {
  static const Gf512 field;
  return field;
}

constexpr int BCH_N = 511;
constexpr int BCH_K = 76;
constexpr int BCH_T = 85;
constexpr int SHORTEN = 19;

// generator polynomial, lcm of minimal polynomials of alpha^1..alpha^2t
std::vector<uint8_t> build_generator() {
  const auto& f = gf();
  bool used[BCH_N] = {};
  std::vector<int> g = {1};  // coefficients in GF(512), g[i] at x^i
  for (int i = 1; i <= 2 * BCH_T; i++) {
    if (used[i % BCH_N]) continue;
    // cyclotomic coset of i
    std::vector<int> coset;
    int c = i % BCH_N;
    while (!used[c]) {
      used[c] = true;
      coset.push_back(c);
      c = (2 * c) % BCH_N;
    }
    // multiply g by the minimal polynomial prod (x - alpha^c)
    for (int e : coset) {
      int root = f.alpha_pow(e);
      std::vector<int> next(g.size() + 1, 0);
      for (size_t j = 0; j < g.size(); j++) {
        next[j + 1] ^= g[j];
        next[j] ^= f.mul(g[j], root);
      }
      g = std::move(next);
    }
  }
  std::vector<uint8_t> out(g.size());
  for (size_t i = 0; i < g.size(); i++) {
    if (g[i] != 0 && g[i] != 1) throw std::logic_error("bch: generator not binary");
    out[i] = uint8_t(g[i]);
  }
  if (out.size() != size_t(BCH_N - BCH_K + 1))
    throw std::logic_error("bch: unexpected generator degree");
  return out;
}

class BchCodec : public Codec {
 public:
  explicit BchCodec(const CodeParams& p) : params_(p), gen_(build_generator()) {
    if (p.n != BCH_N - SHORTEN || p.k != BCH_K - SHORTEN || p.t() != BCH_T)
      throw std::invalid_argument("BchCodec: expected (492,57,171)");
  }
  const CodeParams& params() const override { return params_; }

  // Full-length coefficient layout: co[0..434] parity, co[435..491] message,
  // co[492..510] the shortened (always zero) positions. Transmitted bit i is
  // coefficient 491-i, so the message leads the serialized word.
  BitVec encode(const BitVec& message) const override {
    if (message.size() != params_.k) throw std::invalid_argument("BchCodec: bad message size");
    // long division of m(x)*x^435 by g, processing from the top degree down
    std::vector<uint8_t> work(BCH_N, 0);
    for (int j = 0; j < params_.k; j++) work[491 - j] = message[j];
    for (int deg = BCH_N - 1; deg >= BCH_N - BCH_K; deg--) {
      if (work[deg]) {
        int shift = deg - int(gen_.size() - 1);
        for (size_t j = 0; j < gen_.size(); j++) work[shift + j] ^= gen_[j];
      }
    }
    // work now holds the remainder (degree < 435)
    BitVec out(params_.n);
    for (int j = 0; j < params_.k; j++) out.set(j, message[j]);
    for (int i = params_.k; i < params_.n; i++) out.set(i, work[491 - i]);
    return out;
  }

  std::optional<BitVec> decode(const BitVec& word) const override {
    if (word.size() != params_.n) return std::nullopt;
    const auto& f = gf();
    std::vector<uint8_t> co(BCH_N, 0);
    for (int i = 0; i < params_.n; i++) co[491 - i] = word[i];

    // syndromes S_1..S_2t
    std::array<int, 2 * BCH_T + 1> syn{};
    bool all_zero = true;
    for (int j = 1; j <= 2 * BCH_T; j++) {
      int s = 0;
      for (int i = 0; i < BCH_N; i++)
        if (co[i]) s ^= f.alpha_pow(i * j);
      syn[j] = s;
      if (s) all_zero = false;
    }
    if (all_zero) return extract_message(co);

    // Berlekamp-Massey over GF(512)
    std::vector<int> sigma = {1}, prev = {1};
    int l = 0, m = 1, b = 1;
    for (int step = 0; step < 2 * BCH_T; step++) {
      int delta = syn[step + 1];
      for (int i = 1; i <= l && i < int(sigma.size()); i++)
        delta ^= f.mul(sigma[i], syn[step + 1 - i]);
      if (delta == 0) {
        m++;
      } else if (2 * l <= step) {
        std::vector<int> tmp = sigma;
        int coef = f.mul(delta, f.inv(b));
        if (sigma.size() < prev.size() + m) sigma.resize(prev.size() + m, 0);
        for (size_t i = 0; i < prev.size(); i++) sigma[i + m] ^= f.mul(coef, prev[i]);
        l = step + 1 - l;
        prev = std::move(tmp);
        b = delta;
        m = 1;
      } else {
        int coef = f.mul(delta, f.inv(b));
        if (sigma.size() < prev.size() + m) sigma.resize(prev.size() + m, 0);
        for (size_t i = 0; i < prev.size(); i++) sigma[i + m] ^= f.mul(coef, prev[i]);
        m++;
      }
    }
    while (!sigma.empty() && sigma.back() == 0) sigma.pop_back();
    int deg = int(sigma.size()) - 1;
    if (deg <= 0 || deg > BCH_T) return std::nullopt;

    // Chien search: error at coefficient i iff sigma(alpha^-i) == 0
    int roots = 0;
    for (int i = 0; i < BCH_N; i++) {
      int acc = 0;
      for (int j = 0; j <= deg; j++)
        if (sigma[j]) acc ^= f.mul(sigma[j], f.alpha_pow(-i * j));
      if (acc == 0) {
        if (i >= BCH_N - SHORTEN) return std::nullopt;  // error in a shortened position
        co[i] ^= 1;
        roots++;
      }
    }
    if (roots != deg) return std::nullopt;
    return extract_message(co);
  }

 private:
  BitVec extract_message(const std::vector<uint8_t>& co) const {
    BitVec m(params_.k);
    for (int j = 0; j < params_.k; j++) m.set(j, co[491 - j]);
    return m;
  }

  CodeParams params_;
  std::vector<uint8_t> gen_;
};

}  // namespace

std::unique_ptr<Codec> make_codec(const CodeParams& params) {
  switch (params.family) {
    case CodeParams::Family::rep:
      return std::make_unique<RepCodec>(params);
    case CodeParams::Family::rm_rep:
      return std::make_unique<RmRepCodec>(params);
    case CodeParams::Family::bch:
      return std::make_unique<BchCodec>(params);
  }
  throw std::invalid_argument("make_codec: unknown family");
}

}  // namespace pufsense
