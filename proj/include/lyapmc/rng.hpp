// Counter-based random number generation (Philox4x32-10) plus the variate
// transforms the samplers need: uniforms, Gaussians, Poisson counts.
//
// Why counter-based: every consumer (lattice cell, sample path, environment)
// gets its own stream identified by (master seed, stream id), and the k-th
// draw of a stream is a pure function of those ids. That makes cells
// materializable lazily in any order, paths reproducible independently of
// scheduling, and the whole run replayable from the manifest.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "lyapmc/common.hpp"

namespace lyapmc {

// One application of the Philox4x32 10-round bijection.
// Multiplier and Weyl constants are the standard published ones; the
// known-answer tests pin the exact output words.
inline std::array<u32, 4> philox4x32(std::array<u32, 4> ctr, std::array<u32, 2> key) {
  constexpr u32 kMul0 = 0xD2511F53u;
  constexpr u32 kMul1 = 0xCD9E8D57u;
  constexpr u32 kWeyl0 = 0x9E3779B9u;
  constexpr u32 kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const u64 p0 = static_cast<u64>(kMul0) * ctr[0];
    const u64 p1 = static_cast<u64>(kMul1) * ctr[2];
    const u32 hi0 = static_cast<u32>(p0 >> 32), lo0 = static_cast<u32>(p0);
    const u32 hi1 = static_cast<u32>(p1 >> 32), lo1 = static_cast<u32>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

// A deterministic stream of draws. Key = master seed, counter = (block
// counter, stream id). Each Philox block yields two 64-bit words.
class RngStream {
 public:
  RngStream(u64 master_seed, u64 stream_id)
      : key_{static_cast<u32>(master_seed), static_cast<u32>(master_seed >> 32)},
        stream_lo_(static_cast<u32>(stream_id)),
        stream_hi_(static_cast<u32>(stream_id >> 32)) {}

  u64 next_u64() {
    if (word_ >= 2) refill();
    return buf_[word_++];
  }

  // Uniform on [0,1), 53-bit resolution.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0,1]; safe to pass to log().
  double next_unit_pos() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Standard Gaussian via Box-Muller; the second member of each pair is
  // cached so consecutive calls cost one block per two variates.
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u = next_unit_pos();
    const double v = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u));
    const double a = 6.28318530717958647692 * v;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Poisson count by Knuth's product of uniforms, splitting large means so
  // exp(-lambda) never underflows. Exact for all lambda >= 0.
  i64 next_poisson(double lambda) {
    if (!(lambda >= 0)) throw std::invalid_argument("next_poisson: lambda < 0");
    i64 total = 0;
    while (lambda > 30.0) {
      total += knuth_poisson(30.0);
      lambda -= 30.0;
    }
    if (lambda > 0) total += knuth_poisson(lambda);
    return total;
  }

 private:
  i64 knuth_poisson(double lambda) {
    const double limit = std::exp(-lambda);
    i64 k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= next_unit_pos();
    } while (p > limit);
    return k - 1;
  }

  void refill() {
    const std::array<u32, 4> ctr = {static_cast<u32>(block_), static_cast<u32>(block_ >> 32),
                                    stream_lo_, stream_hi_};
    const std::array<u32, 4> out = philox4x32(ctr, key_);
    buf_[0] = static_cast<u64>(out[0]) | (static_cast<u64>(out[1]) << 32);
    buf_[1] = static_cast<u64>(out[2]) | (static_cast<u64>(out[3]) << 32);
    ++block_;
    word_ = 0;
  }

  std::array<u32, 2> key_;
  u32 stream_lo_, stream_hi_;
  u64 block_ = 0;
  std::array<u64, 2> buf_{};
  int word_ = 2;
  double spare_ = 0;
  bool have_spare_ = false;
};

// Stream-id namespaces. Keeps draws for unrelated purposes from colliding
// even when their integer ids coincide.
namespace stream_tag {
constexpr u64 kCell = 0x01;
constexpr u64 kPath = 0x02;
constexpr u64 kEnvironment = 0x03;
}  // namespace stream_tag

inline u64 make_stream_id(u64 tag, u64 a, u64 b = 0) {
  u64 h = splitmix64(tag);
  h = hash_combine(h, a);
  h = hash_combine(h, b);
  return h;
}

}  // namespace lyapmc
