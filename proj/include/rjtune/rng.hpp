#ifndef RJTUNE_RNG_HPP
#define RJTUNE_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace rjtune {

/// Seeded random stream with an explicit (seed, stream id) identity.
/// Identical (seed, stream) pairs reproduce the exact same draw sequence;
/// distinct stream ids give statistically independent streams. The
/// transforms below are hand-coded so the sequence depends only on the
/// mt19937_64 engine, which is fully specified by the standard.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
      : master_seed_(master_seed),
        stream_id_(stream_id),
        engine_(mix(mix(master_seed) ^ stream_id)) {}

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform draw on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via the Box-Muller transform. Pairs are generated
  /// from exactly two uniforms and the second value is cached, so the
  /// draw count per call sequence is deterministic.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * kPi * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
  }

  void fill_normal(Eigen::Ref<Eigen::VectorXd> out) {
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = normal();
  }

  /// Derive a child stream; children of distinct (parent, index) pairs
  /// do not collide with top-level streams except by 64-bit accident.
  RngStream substream(std::uint64_t index) const {
    return RngStream(mix(master_seed_ ^ mix(stream_id_ + 0x9e3779b97f4a7c15ull)), index);
  }

 private:
  static constexpr double kPi = 3.14159265358979323846;

  // splitmix64 finalizer; used only for seeding.
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace rjtune

#endif  // RJTUNE_RNG_HPP
