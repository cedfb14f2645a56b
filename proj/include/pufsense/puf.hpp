#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pufsense/bits.hpp"
#include "pufsense/crypto_util.hpp"
#include "pufsense/rng.hpp"

namespace pufsense {

struct PufChallenge {
  enum class Kind : uint8_t { sram_address_range = 1, ro_pair_sequence = 2 };

  Kind kind = Kind::sram_address_range;
  uint32_t start = 0;  // sram: first cell
  uint32_t count = 0;  // sram: number of cells
  std::vector<uint32_t> pair_indices;  // ro: ordered pair selection

  static PufChallenge sram_range(uint32_t start, uint32_t count) {
    return {Kind::sram_address_range, start, count, {}};
  }
  static PufChallenge ro_pairs(std::vector<uint32_t> idx) {
    return {Kind::ro_pair_sequence, 0, 0, std::move(idx)};
  }
  /// Adjacent-pair selection 0..num_pairs-1.
  static PufChallenge ro_sequential(uint32_t num_pairs);

  /// Response length this challenge produces (3 bits per RO pair).
  size_t response_bits(uint32_t bits_per_pair = 3) const {
    return kind == Kind::sram_address_range ? count : pair_indices.size() * bits_per_pair;
  }

  Bytes serialize() const;
  static std::optional<PufChallenge> deserialize(std::span<const uint8_t> in);
  bool operator==(const PufChallenge&) const = default;
};

struct PufResponse {
  BitVec bits;
  std::string device_id;
};

// ------------------------------------------------------------------ SRAM --

struct SramParams {
  uint32_t num_cells = 8192;
  double bias = 0.5;            // P(stable cell value = 1)
  double mean_flip_rate = 0.0;  // mean per-readout flip probability
  double reliability_shape = 1.0;  // Beta dispersion of per-cell flip rates
  uint64_t rng_seed = 0;
};

/// Start-up-state SRAM model: per-cell stable values drawn once per device,
/// per-cell flip probabilities Beta-distributed so that a minority of cells
/// carries most of the noise.
class SramPuf {
 public:
  explicit SramPuf(const SramParams& params);

  PufResponse sample(const PufChallenge& challenge, uint64_t readout_index) const;
  /// Noise-free stable values (golden reference).
  PufResponse reference(const PufChallenge& challenge) const;

  const SramParams& params() const { return params_; }
  const std::string& device_id() const { return device_id_; }

 private:
  SramParams params_;
  std::string device_id_;
  BitVec stable_;
  std::vector<double> flip_prob_;
};

// -------------------------------------------------------------------- RO --

struct RoParams {
  uint32_t num_ros = 1040;
  uint32_t stages = 3;
  uint32_t counter_width = 16;
  std::vector<uint32_t> extract_positions = {8, 9, 10};
  double freq_mean = 200e6;        // Hz
  double freq_process_sd = 6.5e6;  // per-device, fixed at manufacture
  double freq_noise_sd = 60e3;     // per-readout jitter
  uint64_t rng_seed = 0;
};

/// Ring-oscillator pair race: two counters clocked by neighbouring ROs; at
/// the first overflow the other counter is read and bits at the extract
/// positions become the pair's output. The race is resolved analytically
/// (overflow time = 2^width / frequency), which is output-equivalent to a
/// tick-by-tick simulation.
class RoPuf {
 public:
  explicit RoPuf(const RoParams& params);

  PufResponse sample(const PufChallenge& challenge, uint64_t readout_index) const;
  PufResponse reference(const PufChallenge& challenge) const;

  const RoParams& params() const { return params_; }
  const std::string& device_id() const { return device_id_; }
  uint32_t num_pairs() const { return params_.num_ros - 1; }

 private:
  BitVec race(const PufChallenge& challenge, Rng* jitter) const;

  RoParams params_;
  std::string device_id_;
  std::vector<double> base_freq_;
};

// --------------------------------------------------------------- metrics --

/// Percentage of 1-bits.
double hamming_weight_pct(const PufResponse& r);

/// Mean and max normalized Hamming distance (percent) of samples vs ref.
std::pair<double, double> hd_intra_pct(const PufResponse& ref,
                                       std::span<const PufResponse> samples);

/// Mean pairwise normalized Hamming distance (percent), all unordered pairs.
double hd_inter_pct(std::span<const PufResponse> responses);

struct QualityStats {
  double mean_hw = 0;
  double mean_hd_intra = 0;
  double max_hd_intra = 0;
  double mean_hd_inter = 0;
};

// -------------------------------------------------------------- profiles --

// Parameter sets tuned so the simulators land on the characterization
// figures of the three reference platforms.

SramParams sram_profile_8bit(uint64_t seed);   // 1 kB MCU SRAM: HW 63.5, HDintra 3.4
SramParams sram_profile_32bit(uint64_t seed);  // 15 kB MCU SRAM: HW 63.96, HDintra 7.66
RoParams ro_profile_fpga(uint64_t seed);       // 1040-RO fabric: HW 53.95, HDintra 3.6

// ------------------------------------------------------------- dump file --

/// One response per line, ASCII '0'/'1', no separators.
void write_response_dump(std::ostream& os, std::span<const PufResponse> responses);
std::vector<PufResponse> read_response_dump(std::istream& is);

}  // namespace pufsense
