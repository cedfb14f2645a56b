#pragma once

// Non-interactive witness-indistinguishable proofs for pairing-product
// equations over the asymmetric (SXDH) two-slot commitment scheme.
// Commitments live in G1^2 / G2^2; every supported equation has the form
//     prod_i e(A_i, Y_i) * prod_j e(X_j, B_j) = 1
// with committed variables Y_i in G2 and X_j in G1 and public constants
// A_i in G1, B_j in G2. Proofs are 4 G1 + 4 G2 elements per equation.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "pufsense/bls.hpp"
#include "pufsense/bn254.hpp"
#include "pufsense/crypto_util.hpp"
#include "pufsense/rng.hpp"

namespace pufsense::niwi {

using bn254::Fr;
using bn254::G1;
using bn254::G2;
using bn254::Gt;

enum class CrsMode : uint8_t { binding = 0, hiding = 1 };

struct G1Pair {
  G1 a, b;
};
struct G2Pair {
  G2 a, b;
};

struct Crs {
  CrsMode mode = CrsMode::binding;
  G1Pair u1, u2;  // commitment bases for G1-slot values
  G2Pair v1, v2;  // commitment bases for G2-slot values
  G1Pair u_sc;    // scalar-slot base: u2 * (1, g1)

  Bytes serialize() const;
  static std::optional<Crs> deserialize(std::span<const uint8_t> in);
};

/// Extraction trapdoor, held offline by the authority in binding mode.
struct ExtractKey {
  Fr alpha;  // dlog of u1.b over u1.a
  Fr beta;   // dlog of v1.b over v1.a
};

struct CrsBundle {
  Crs crs;
  std::optional<ExtractKey> xk;  // binding mode only
};

CrsBundle crs_gen(Rng& rng, CrsMode mode);

// ------------------------------------------------------------ commitments --

enum class Slot : uint8_t { scalar_d = 0, g1_c = 1, g2_c = 2 };

/// Two-element commitment. The G1 pair is active for scalar_d/g1_c slots,
/// the G2 pair for g2_c. Verifier-side commitments carry no randomness.
struct Commitment {
  Slot slot = Slot::g1_c;
  G1Pair g1;
  G2Pair g2;

  Bytes serialize() const;  // elements only; the slot comes from the layout
  static std::optional<Commitment> deserialize(Slot slot, std::span<const uint8_t> in);
  static size_t serialized_size(Slot slot) { return slot == Slot::g2_c ? 128 : 64; }
};

/// Prover-retained commitment randomness (r2 unused for scalar_d).
struct Opening {
  Fr r1, r2;
};

Commitment commit_scalar(const Crs& crs, const Fr& value, Rng& rng, Opening* opening);
Commitment commit_g1(const Crs& crs, const G1& value, Rng& rng, Opening* opening);
Commitment commit_g2(const Crs& crs, const G2& value, Rng& rng, Opening* opening);

/// Binding-mode extraction. Scalar commitments yield the group image g1^x,
/// not x itself.
G1 extract_g1(const ExtractKey& xk, const Commitment& c);
G2 extract_g2(const ExtractKey& xk, const Commitment& c);
G1 extract_scalar_image(const ExtractKey& xk, const Commitment& c);

// -------------------------------------------------------------- statements --

struct PpeStatement {
  enum class Layout : uint8_t { eq_msg = 1, eq_cert = 2, eq_aggregate = 3 };

  Layout layout = Layout::eq_msg;
  uint16_t q = 1;
  std::vector<G1> a_consts;  // paired with the G2 variables, in order
  std::vector<G2> b_consts;  // paired with the G1 variables, in order

  size_t num_g2_vars() const { return a_consts.size(); }
  size_t num_g1_vars() const { return b_consts.size(); }
};

/// e(h_M, pk) = e(sigma, g2):  G2 var [pk], G1 var [sigma].
PpeStatement statement_eq_msg(const G1& h_m);
/// e(h_c, mpk) = e(cert, g2):  G1 vars [h_c, cert].
PpeStatement statement_eq_cert(const G2& mpk);
/// e(sig_bar, g2) = prod e(h_Mi, pk_i) * prod e(h_ci, mpk):
/// G2 vars [pk_1..pk_Q], G1 vars [h_c1..h_cQ, sig_bar].
PpeStatement statement_eq_aggregate(std::span<const G1> h_ms, const G2& mpk);

// ------------------------------------------------------------------ proofs --

struct Proof {
  std::array<G1, 4> pi;
  std::array<G2, 4> theta;
};

struct Witness {
  std::vector<std::pair<G2, Opening>> g2_vars;
  std::vector<std::pair<G1, Opening>> g1_vars;
};

/// Evaluates the equation on the witness first and refuses to prove a false
/// statement (throws std::invalid_argument).
Proof prove(const Crs& crs, const PpeStatement& stmt, const Witness& witness, Rng& rng);

bool verify(const Crs& crs, const PpeStatement& stmt,
            std::span<const Commitment> g2_commitments,
            std::span<const Commitment> g1_commitments, const Proof& proof);

// ------------------------------------------------------------ proof bundle --

/// Self-contained commitments+proof container. For the aggregate layout the
/// slot order is d(I_1..Q), c(pk_1..Q), c(h_c1..Q), c(sig_bar). The d(I)
/// commitments are carried for format fidelity; no verification equation
/// consumes them.
struct ProofBundle {
  PpeStatement::Layout layout = PpeStatement::Layout::eq_aggregate;
  uint16_t q = 1;
  std::vector<Commitment> d_identity;  // scalar_d, aggregate layout only
  std::vector<Commitment> g2_commitments;
  std::vector<Commitment> g1_commitments;
  Proof proof;

  Bytes serialize() const;
  static std::optional<ProofBundle> deserialize(std::span<const uint8_t> in);
};

// -------------------------------------------------------- size accounting --

/// Element counts of the anonymized report at the published formulas:
/// symmetric per-reading 30Q, symmetric aggregated 6Q+12, asymmetric
/// aggregated (6+2Q) G1 + (4+2Q) G2.
struct OverheadCounts {
  uint32_t g_elems = 0;   // symmetric setting
  uint32_t g1_elems = 0;  // asymmetric setting
  uint32_t g2_elems = 0;
  uint64_t bits = 0;

  uint64_t bytes() const { return bits / 8; }
};

OverheadCounts element_counts(GroupConfig::Setting setting, uint32_t q, bool aggregated,
                              const GroupWidths& widths = GroupConfig::compact_bn_widths());

/// The transmitted bundle: published count plus the 2Q committed h_c
/// elements the aggregate equation needs.
OverheadCounts actual_element_counts(uint32_t q,
                                     const GroupWidths& widths = GroupConfig::compact_bn_widths());

}  // namespace pufsense::niwi
