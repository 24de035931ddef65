#pragma once

#include <cstdint>
#include <random>

namespace seqmon {

/// Mixes a master seed with a stream index into an independent 64-bit key.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream_id);

/// Gaussian increments for one trajectory. The sequence depends only on
/// (seed, stream_id), so trajectories can be generated in any order.
class NoiseStream {
 public:
  NoiseStream(std::uint64_t seed, std::uint64_t stream_id, double dt);

  /// One Wiener increment component, N(0, dt).
  double increment() { return sqrt_dt_ * normal_(engine_); }

  /// Fills `out` with independent N(0, dt) entries.
  template <class Vec>
  void fill(Vec& out) {
    for (decltype(out.size()) i = 0; i < out.size(); ++i) out[i] = increment();
  }

  double standard_normal() { return normal_(engine_); }
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  double dt() const { return dt_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  double dt_;
  double sqrt_dt_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace seqmon
