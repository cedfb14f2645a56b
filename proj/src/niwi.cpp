#include "pufsense/niwi.hpp"

#include <stdexcept>

namespace pufsense::niwi {

namespace {

// componentwise group operations on commitment-key / commitment pairs
G1Pair mul(const G1Pair& x, const G1Pair& y) { return {x.a + y.a, x.b + y.b}; }
G2Pair mul(const G2Pair& x, const G2Pair& y) { return {x.a + y.a, x.b + y.b}; }
G1Pair pow(const G1Pair& x, const Fr& s) { return {x.a * s, x.b * s}; }
G2Pair pow(const G2Pair& x, const Fr& s) { return {x.a * s, x.b * s}; }
G1Pair inv(const G1Pair& x) { return {G1(x.a.neg()), G1(x.b.neg())}; }
G2Pair inv(const G2Pair& x) { return {G2(x.a.neg()), G2(x.b.neg())}; }

G1Pair iota1(const G1& x) { return {G1(bn254::Point<bn254::Fp>::infinity()), x}; }
G2Pair iota2(const G2& x) { return {G2(bn254::Point<bn254::Fp2>::infinity()), x}; }

const G1& pick(const G1Pair& p, int idx) { return idx == 0 ? p.a : p.b; }
const G2& pick(const G2Pair& p, int idx) { return idx == 0 ? p.a : p.b; }

}  // namespace

CrsBundle crs_gen(Rng& rng, CrsMode mode) {
  Fr alpha = bn254::random_fr(rng);
  Fr tau = bn254::random_fr(rng);
  Fr beta = bn254::random_fr(rng);
  Fr upsilon = bn254::random_fr(rng);

  Crs crs;
  crs.mode = mode;
  G1 g1 = G1::generator();
  G2 g2 = G2::generator();
  crs.u1 = {g1, g1 * alpha};
  crs.u2 = pow(crs.u1, tau);
  crs.v1 = {g2, g2 * beta};
  crs.v2 = pow(crs.v1, upsilon);
  if (mode == CrsMode::hiding) {
    // u2 := tau*u1 - (O, g1): spans the plane with u1, commitments become
    // perfectly hiding and the trapdoor stops extracting
    crs.u2.b = crs.u2.b + g1.neg();
    crs.v2.b = crs.v2.b + g2.neg();
  }
  crs.u_sc = mul(crs.u2, iota1(g1));

  CrsBundle out;
  out.crs = crs;
  if (mode == CrsMode::binding) out.xk = ExtractKey{alpha, beta};
  return out;
}

Bytes Crs::serialize() const {
  ByteWriter w;
  w.u8(uint8_t(mode));
  for (const G1* p : {&u1.a, &u1.b, &u2.a, &u2.b}) {
    auto enc = p->serialize();
    w.bytes(enc);
  }
  for (const G2* p : {&v1.a, &v1.b, &v2.a, &v2.b}) {
    auto enc = p->serialize();
    w.bytes(enc);
  }
  return w.buf;
}

std::optional<Crs> Crs::deserialize(std::span<const uint8_t> in) {
  if (in.size() != 1 + 4 * 32 + 4 * 64) return std::nullopt;
  Crs crs;
  if (in[0] > 1) return std::nullopt;
  crs.mode = CrsMode(in[0]);
  size_t pos = 1;
  G1* g1s[4] = {&crs.u1.a, &crs.u1.b, &crs.u2.a, &crs.u2.b};
  for (G1* p : g1s) {
    auto v = G1::deserialize(in.subspan(pos, 32));
    if (!v) return std::nullopt;
    *p = *v;
    pos += 32;
  }
  G2* g2s[4] = {&crs.v1.a, &crs.v1.b, &crs.v2.a, &crs.v2.b};
  for (G2* p : g2s) {
    auto v = G2::deserialize(in.subspan(pos, 64));
    if (!v) return std::nullopt;
    *p = *v;
    pos += 64;
  }
  crs.u_sc = mul(crs.u2, iota1(G1::generator()));
  return crs;
}

// ------------------------------------------------------------ commitments --

Commitment commit_scalar(const Crs& crs, const Fr& value, Rng& rng, Opening* opening) {
  Fr r = bn254::random_fr(rng);
  Commitment c;
  c.slot = Slot::scalar_d;
  c.g1 = mul(pow(crs.u_sc, value), pow(crs.u1, r));
  if (opening) *opening = Opening{r, Fr::zero()};
  return c;
}

Commitment commit_g1(const Crs& crs, const G1& value, Rng& rng, Opening* opening) {
  Fr r1 = bn254::random_fr(rng);
  Fr r2 = bn254::random_fr(rng);
  Commitment c;
  c.slot = Slot::g1_c;
  c.g1 = mul(iota1(value), mul(pow(crs.u1, r1), pow(crs.u2, r2)));
  if (opening) *opening = Opening{r1, r2};
  return c;
}

Commitment commit_g2(const Crs& crs, const G2& value, Rng& rng, Opening* opening) {
  Fr r1 = bn254::random_fr(rng);
  Fr r2 = bn254::random_fr(rng);
  Commitment c;
  c.slot = Slot::g2_c;
  c.g2 = mul(iota2(value), mul(pow(crs.v1, r1), pow(crs.v2, r2)));
  if (opening) *opening = Opening{r1, r2};
  return c;
}

G1 extract_g1(const ExtractKey& xk, const Commitment& c) {
  if (c.slot == Slot::g2_c) throw std::invalid_argument("extract_g1: wrong slot");
  return c.g1.b + (c.g1.a * xk.alpha).neg();
}

G2 extract_g2(const ExtractKey& xk, const Commitment& c) {
  if (c.slot != Slot::g2_c) throw std::invalid_argument("extract_g2: wrong slot");
  return c.g2.b + (c.g2.a * xk.beta).neg();
}

G1 extract_scalar_image(const ExtractKey& xk, const Commitment& c) {
  if (c.slot != Slot::scalar_d) throw std::invalid_argument("extract_scalar_image: wrong slot");
  return extract_g1(xk, c);
}

Bytes Commitment::serialize() const {
  ByteWriter w;
  if (slot == Slot::g2_c) {
    auto a = g2.a.serialize(), b = g2.b.serialize();
    w.bytes(a);
    w.bytes(b);
  } else {
    auto a = g1.a.serialize(), b = g1.b.serialize();
    w.bytes(a);
    w.bytes(b);
  }
  return w.buf;
}

std::optional<Commitment> Commitment::deserialize(Slot slot, std::span<const uint8_t> in) {
  Commitment c;
  c.slot = slot;
  if (slot == Slot::g2_c) {
    if (in.size() != 128) return std::nullopt;
    auto a = G2::deserialize(in.first(64));
    auto b = G2::deserialize(in.subspan(64));
    if (!a || !b) return std::nullopt;
    c.g2 = {*a, *b};
  } else {
    if (in.size() != 64) return std::nullopt;
    auto a = G1::deserialize(in.first(32));
    auto b = G1::deserialize(in.subspan(32));
    if (!a || !b) return std::nullopt;
    c.g1 = {*a, *b};
  }
  return c;
}

// -------------------------------------------------------------- statements --

PpeStatement statement_eq_msg(const G1& h_m) {
  PpeStatement s;
  s.layout = PpeStatement::Layout::eq_msg;
  s.q = 1;
  s.a_consts = {h_m};
  s.b_consts = {G2(G2::generator().neg())};
  return s;
}

PpeStatement statement_eq_cert(const G2& mpk) {
  PpeStatement s;
  s.layout = PpeStatement::Layout::eq_cert;
  s.q = 1;
  s.a_consts = {};
  s.b_consts = {mpk, G2(G2::generator().neg())};
  return s;
}

PpeStatement statement_eq_aggregate(std::span<const G1> h_ms, const G2& mpk) {
  if (h_ms.empty()) throw std::invalid_argument("statement_eq_aggregate: empty reading set");
  PpeStatement s;
  s.layout = PpeStatement::Layout::eq_aggregate;
  s.q = uint16_t(h_ms.size());
  s.a_consts.assign(h_ms.begin(), h_ms.end());
  s.b_consts.assign(h_ms.size(), mpk);           // one mpk slot per committed h_c
  s.b_consts.push_back(G2(G2::generator().neg()));  // the aggregate signature slot
  return s;
}

// ------------------------------------------------------------------ proofs --

Proof prove(const Crs& crs, const PpeStatement& stmt, const Witness& witness, Rng& rng) {
  if (witness.g2_vars.size() != stmt.num_g2_vars() ||
      witness.g1_vars.size() != stmt.num_g1_vars())
    throw std::invalid_argument("prove: witness arity mismatch");

  // refuse to prove a false statement
  bn254::PairingProduct check;
  for (size_t i = 0; i < stmt.a_consts.size(); i++)
    check.add(stmt.a_consts[i], witness.g2_vars[i].first);
  for (size_t j = 0; j < stmt.b_consts.size(); j++)
    check.add(witness.g1_vars[j].first, stmt.b_consts[j]);
  if (!check.result().is_one()) throw std::invalid_argument("prove: witness does not satisfy the equation");

  // base proof from the commitment randomness
  G1 pi1_b(bn254::Point<bn254::Fp>::infinity()), pi2_b = pi1_b;
  for (size_t i = 0; i < stmt.a_consts.size(); i++) {
    pi1_b = pi1_b + stmt.a_consts[i] * witness.g2_vars[i].second.r1;
    pi2_b = pi2_b + stmt.a_consts[i] * witness.g2_vars[i].second.r2;
  }
  G2 th1_b(bn254::Point<bn254::Fp2>::infinity()), th2_b = th1_b;
  for (size_t j = 0; j < stmt.b_consts.size(); j++) {
    th1_b = th1_b + stmt.b_consts[j] * witness.g1_vars[j].second.r1;
    th2_b = th2_b + stmt.b_consts[j] * witness.g1_vars[j].second.r2;
  }
  G1Pair pi1 = iota1(pi1_b);
  G1Pair pi2 = iota1(pi2_b);
  G2Pair th1 = iota2(th1_b);
  G2Pair th2 = iota2(th2_b);

  // uniform re-randomization over the solution space
  Fr t11 = bn254::random_fr(rng), t12 = bn254::random_fr(rng);
  Fr t21 = bn254::random_fr(rng), t22 = bn254::random_fr(rng);
  th1 = mul(th1, mul(pow(crs.v1, t11), pow(crs.v2, t12)));
  th2 = mul(th2, mul(pow(crs.v1, t21), pow(crs.v2, t22)));
  pi1 = mul(pi1, inv(mul(pow(crs.u1, t11), pow(crs.u2, t21))));
  pi2 = mul(pi2, inv(mul(pow(crs.u1, t12), pow(crs.u2, t22))));

  return Proof{{pi1.a, pi1.b, pi2.a, pi2.b}, {th1.a, th1.b, th2.a, th2.b}};
}

bool verify(const Crs& crs, const PpeStatement& stmt,
            std::span<const Commitment> g2_commitments,
            std::span<const Commitment> g1_commitments, const Proof& proof) {
  if (g2_commitments.size() != stmt.num_g2_vars() ||
      g1_commitments.size() != stmt.num_g1_vars())
    return false;
  for (const auto& c : g2_commitments)
    if (c.slot != Slot::g2_c) return false;
  for (const auto& c : g1_commitments)
    if (c.slot == Slot::g2_c) return false;

  G1Pair pi1{proof.pi[0], proof.pi[1]}, pi2{proof.pi[2], proof.pi[3]};
  G2Pair th1{proof.theta[0], proof.theta[1]}, th2{proof.theta[2], proof.theta[3]};

  for (int m = 0; m < 2; m++) {
    for (int n = 0; n < 2; n++) {
      bn254::PairingProduct acc;
      if (m == 1)
        for (size_t i = 0; i < stmt.a_consts.size(); i++)
          acc.add(stmt.a_consts[i], pick(g2_commitments[i].g2, n));
      if (n == 1)
        for (size_t j = 0; j < stmt.b_consts.size(); j++)
          acc.add(pick(g1_commitments[j].g1, m), stmt.b_consts[j]);
      acc.add(G1(pick(crs.u1, m).neg()), pick(th1, n));
      acc.add(G1(pick(crs.u2, m).neg()), pick(th2, n));
      acc.add(G1(pick(pi1, m).neg()), pick(crs.v1, n));
      acc.add(G1(pick(pi2, m).neg()), pick(crs.v2, n));
      if (!acc.result().is_one()) return false;
    }
  }
  return true;
}

// ------------------------------------------------------------ proof bundle --

Bytes ProofBundle::serialize() const {
  ByteWriter w;
  w.u8(uint8_t(layout));
  w.u16(q);
  for (const auto& c : d_identity) w.bytes(c.serialize());
  for (const auto& c : g2_commitments) w.bytes(c.serialize());
  for (const auto& c : g1_commitments) w.bytes(c.serialize());
  for (const auto& p : proof.pi) {
    auto enc = p.serialize();
    w.bytes(enc);
  }
  for (const auto& t : proof.theta) {
    auto enc = t.serialize();
    w.bytes(enc);
  }
  return w.buf;
}

std::optional<ProofBundle> ProofBundle::deserialize(std::span<const uint8_t> in) {
  if (in.size() < 3) return std::nullopt;
  ProofBundle b;
  if (in[0] < 1 || in[0] > 3) return std::nullopt;
  b.layout = PpeStatement::Layout(in[0]);
  b.q = uint16_t(in[1]) << 8 | in[2];
  if (b.q < 1 || b.q > 4096) return std::nullopt;

  size_t n_scalar = 0, n_g2 = 0, n_g1 = 0;
  switch (b.layout) {
    case PpeStatement::Layout::eq_msg:
      if (b.q != 1) return std::nullopt;
      n_g2 = 1;  // c(pk)
      n_g1 = 1;  // c(sigma)
      break;
    case PpeStatement::Layout::eq_cert:
      if (b.q != 1) return std::nullopt;
      n_g1 = 2;  // c(h_c), c(cert)
      break;
    case PpeStatement::Layout::eq_aggregate:
      n_scalar = b.q;
      n_g2 = b.q;
      n_g1 = b.q + 1;  // c(h_c)_1..Q, c(sig_bar)
      break;
  }
  size_t expect = 3 + n_scalar * 64 + n_g2 * 128 + n_g1 * 64 + 4 * 32 + 4 * 64;
  if (in.size() != expect) return std::nullopt;

  size_t pos = 3;
  auto take_commit = [&](Slot slot) -> std::optional<Commitment> {
    size_t len = Commitment::serialized_size(slot);
    auto c = Commitment::deserialize(slot, in.subspan(pos, len));
    pos += len;
    return c;
  };
  for (size_t i = 0; i < n_scalar; i++) {
    auto c = take_commit(Slot::scalar_d);
    if (!c) return std::nullopt;
    b.d_identity.push_back(*c);
  }
  for (size_t i = 0; i < n_g2; i++) {
    auto c = take_commit(Slot::g2_c);
    if (!c) return std::nullopt;
    b.g2_commitments.push_back(*c);
  }
  for (size_t i = 0; i < n_g1; i++) {
    auto c = take_commit(Slot::g1_c);
    if (!c) return std::nullopt;
    b.g1_commitments.push_back(*c);
  }
  for (auto& p : b.proof.pi) {
    auto v = G1::deserialize(in.subspan(pos, 32));
    if (!v) return std::nullopt;
    p = *v;
    pos += 32;
  }
  for (auto& t : b.proof.theta) {
    auto v = G2::deserialize(in.subspan(pos, 64));
    if (!v) return std::nullopt;
    t = *v;
    pos += 64;
  }
  return b;
}

// -------------------------------------------------------- size accounting --

OverheadCounts element_counts(GroupConfig::Setting setting, uint32_t q, bool aggregated,
                              const GroupWidths& widths) {
  if (q < 1) throw std::invalid_argument("element_counts: q < 1");
  OverheadCounts c;
  if (setting == GroupConfig::Setting::symmetric) {
    c.g_elems = aggregated ? 6 * q + 12 : 30 * q;
    c.bits = uint64_t(c.g_elems) * GroupConfig::symmetric_g_bits;
    return c;
  }
  if (!aggregated)
    throw std::invalid_argument("element_counts: asymmetric counts are defined for the aggregated report");
  c.g1_elems = 6 + 2 * q;
  c.g2_elems = 4 + 2 * q;
  c.bits = uint64_t(c.g1_elems) * widths.g1_bits + uint64_t(c.g2_elems) * widths.g2_bits;
  return c;
}

OverheadCounts actual_element_counts(uint32_t q, const GroupWidths& widths) {
  OverheadCounts c = element_counts(GroupConfig::Setting::asymmetric, q, true, widths);
  c.g1_elems += 2 * q;  // the committed h_c values
  c.bits += uint64_t(2 * q) * widths.g1_bits;
  return c;
}

}  // namespace pufsense::niwi
