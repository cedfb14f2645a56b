#include "pufsense/puf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pufsense {

PufChallenge PufChallenge::ro_sequential(uint32_t num_pairs) {
  std::vector<uint32_t> idx(num_pairs);
  for (uint32_t i = 0; i < num_pairs; i++) idx[i] = i;
  return ro_pairs(std::move(idx));
}

Bytes PufChallenge::serialize() const {
  ByteWriter w;
  w.u8(uint8_t(kind));
  if (kind == Kind::sram_address_range) {
    w.u32(start);
    w.u32(count);
  } else {
    w.u32(uint32_t(pair_indices.size()));
    for (uint32_t i : pair_indices) w.u32(i);
  }
  return w.buf;
}

std::optional<PufChallenge> PufChallenge::deserialize(std::span<const uint8_t> in) {
  ByteReader r{in};
  PufChallenge c;
  uint8_t k = r.u8();
  if (k == uint8_t(Kind::sram_address_range)) {
    c.kind = Kind::sram_address_range;
    c.start = r.u32();
    c.count = r.u32();
  } else if (k == uint8_t(Kind::ro_pair_sequence)) {
    c.kind = Kind::ro_pair_sequence;
    uint32_t n = r.u32();
    if (n > (1u << 24)) return std::nullopt;
    c.pair_indices.resize(n);
    for (auto& v : c.pair_indices) v = r.u32();
  } else {
    return std::nullopt;
  }
  if (!r.done()) return std::nullopt;
  return c;
}

// ------------------------------------------------------------------ SRAM --

SramPuf::SramPuf(const SramParams& params) : params_(params) {
  if (params.num_cells == 0) throw std::invalid_argument("SramPuf: num_cells == 0");
  if (params.bias < 0 || params.bias > 1) throw std::invalid_argument("SramPuf: bias out of range");
  if (params.mean_flip_rate < 0 || params.mean_flip_rate > 0.5)
    throw std::invalid_argument("SramPuf: mean_flip_rate out of range");
  if (params.reliability_shape <= 0)
    throw std::invalid_argument("SramPuf: reliability_shape <= 0");

  char buf[32];
  snprintf(buf, sizeof(buf), "sram-%016llx", (unsigned long long)params.rng_seed);
  device_id_ = buf;

  Rng device(params.rng_seed);
  Rng stable_rng = device.child("stable");
  Rng rel_rng = device.child("reliability");
  stable_ = BitVec(params.num_cells);
  flip_prob_.resize(params.num_cells, 0.0);
  double mu = params.mean_flip_rate;
  double s = params.reliability_shape;
  for (uint32_t i = 0; i < params.num_cells; i++) {
    stable_.set(i, stable_rng.bernoulli(params.bias));
    if (mu > 0) flip_prob_[i] = rel_rng.beta(mu * s, (1.0 - mu) * s);
  }
}

PufResponse SramPuf::reference(const PufChallenge& challenge) const {
  if (challenge.kind != PufChallenge::Kind::sram_address_range)
    throw std::invalid_argument("SramPuf: challenge kind mismatch");
  if (uint64_t(challenge.start) + challenge.count > params_.num_cells || challenge.count == 0)
    throw std::out_of_range("SramPuf: challenge addresses cells out of range");
  PufResponse r;
  r.device_id = device_id_;
  r.bits = stable_.slice(challenge.start, challenge.count);
  return r;
}

PufResponse SramPuf::sample(const PufChallenge& challenge, uint64_t readout_index) const {
  PufResponse r = reference(challenge);
  Rng noise = Rng(params_.rng_seed).child("readout").child(readout_index);
  for (uint32_t i = 0; i < challenge.count; i++) {
    double fp = flip_prob_[challenge.start + i];
    if (fp > 0 && noise.bernoulli(fp)) r.bits.flip(i);
  }
  return r;
}

// -------------------------------------------------------------------- RO --

RoPuf::RoPuf(const RoParams& params) : params_(params) {
  if (params.num_ros < 2) throw std::invalid_argument("RoPuf: need at least 2 ROs");
  if (params.counter_width == 0 || params.counter_width > 32)
    throw std::invalid_argument("RoPuf: counter_width out of range");
  for (uint32_t pos : params.extract_positions)
    if (pos >= params.counter_width)
      throw std::invalid_argument("RoPuf: extract position beyond counter width");
  if (params.freq_mean <= 0) throw std::invalid_argument("RoPuf: freq_mean <= 0");

  char buf[32];
  snprintf(buf, sizeof(buf), "ro-%016llx", (unsigned long long)params.rng_seed);
  device_id_ = buf;

  Rng process = Rng(params.rng_seed).child("process");
  base_freq_.resize(params.num_ros);
  for (auto& f : base_freq_) {
    f = process.normal(params.freq_mean, params.freq_process_sd);
    if (f <= 0) f = params.freq_mean;  // degenerate tail guard
  }
}

BitVec RoPuf::race(const PufChallenge& challenge, Rng* jitter) const {
  if (challenge.kind != PufChallenge::Kind::ro_pair_sequence)
    throw std::invalid_argument("RoPuf: challenge kind mismatch");
  const uint64_t overflow = 1ull << params_.counter_width;
  BitVec out;
  for (uint32_t pair : challenge.pair_indices) {
    if (pair + 1 >= params_.num_ros) throw std::out_of_range("RoPuf: pair index out of range");
    double fa = base_freq_[pair];
    double fb = base_freq_[pair + 1];
    if (jitter) {
      fa += jitter->normal(0.0, params_.freq_noise_sd);
      fb += jitter->normal(0.0, params_.freq_noise_sd);
    }
    // the faster counter overflows first; ties go to the lower-indexed RO
    uint64_t value;
    if (fa >= fb) {
      value = uint64_t(double(overflow) * fb / fa);
    } else {
      value = uint64_t(double(overflow) * fa / fb);
    }
    if (value >= overflow) value = overflow - 1;
    for (uint32_t pos : params_.extract_positions) out.push_back((value >> pos) & 1);
  }
  return out;
}

PufResponse RoPuf::reference(const PufChallenge& challenge) const {
  PufResponse r;
  r.device_id = device_id_;
  r.bits = race(challenge, nullptr);
  return r;
}

PufResponse RoPuf::sample(const PufChallenge& challenge, uint64_t readout_index) const {
  Rng jitter = Rng(params_.rng_seed).child("jitter").child(readout_index);
  PufResponse r;
  r.device_id = device_id_;
  r.bits = race(challenge, &jitter);
  return r;
}

// --------------------------------------------------------------- metrics --

double hamming_weight_pct(const PufResponse& r) {
  if (r.bits.empty()) throw std::invalid_argument("hamming_weight: empty response");
  return 100.0 * double(r.bits.count_ones()) / double(r.bits.size());
}

std::pair<double, double> hd_intra_pct(const PufResponse& ref,
                                       std::span<const PufResponse> samples) {
  if (samples.empty()) throw std::invalid_argument("hd_intra: no samples");
  double sum = 0, max = 0;
  for (const auto& s : samples) {
    if (s.bits.size() != ref.bits.size())
      throw std::invalid_argument("hd_intra: length mismatch");
    double d = 100.0 * double(BitVec::hamming(ref.bits, s.bits)) / double(ref.bits.size());
    sum += d;
    max = std::max(max, d);
  }
  return {sum / double(samples.size()), max};
}

double hd_inter_pct(std::span<const PufResponse> responses) {
  if (responses.size() < 2) throw std::invalid_argument("hd_inter: need >= 2 responses");
  double sum = 0;
  size_t pairs = 0;
  for (size_t i = 0; i < responses.size(); i++)
    for (size_t j = i + 1; j < responses.size(); j++) {
      if (responses[i].bits.size() != responses[j].bits.size())
        throw std::invalid_argument("hd_inter: length mismatch");
      sum += 100.0 * double(BitVec::hamming(responses[i].bits, responses[j].bits)) /
             double(responses[i].bits.size());
      pairs++;
    }
  return sum / double(pairs);
}

// -------------------------------------------------------------- profiles --

SramParams sram_profile_8bit(uint64_t seed) {
  SramParams p;
  p.num_cells = 8192;  // 1 kB
  p.bias = 0.635;
  p.mean_flip_rate = 0.034;
  p.reliability_shape = 1.0;
  p.rng_seed = seed;
  return p;
}

SramParams sram_profile_32bit(uint64_t seed) {
  SramParams p;
  p.num_cells = 15 * 1024 * 8;
  p.bias = 0.6396;
  p.mean_flip_rate = 0.0766;
  p.reliability_shape = 1.0;
  p.rng_seed = seed;
  return p;
}

RoParams ro_profile_fpga(uint64_t seed) {
  RoParams p;  // calibrated against the characterization targets
  p.rng_seed = seed;
  return p;
}

// ------------------------------------------------------------- dump file --

void write_response_dump(std::ostream& os, std::span<const PufResponse> responses) {
  for (const auto& r : responses) os << r.bits.to_string() << '\n';
}

std::vector<PufResponse> read_response_dump(std::istream& is) {
  std::vector<PufResponse> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    PufResponse r;
    r.bits = BitVec::from_string(line);
    r.device_id = "dump";
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace pufsense
