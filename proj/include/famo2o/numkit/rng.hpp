#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace famo2o {
namespace numkit {

/// Deterministic random source. All stochastic components draw from an Rng
/// they own, so independent components never share a stream and runs replay
/// bit-identically from a seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform on [0, 1) with 53 bits of mantissa.
  double uniform01() { return (gen_() >> 11) * 0x1.0p-53; }

  /// Uniform on [lo, hi). Degenerate lo == hi returns lo.
  double uniform(double lo, double hi) {
    if (lo > hi) throw std::invalid_argument("Rng::uniform: lo > hi");
    return lo + (hi - lo) * uniform01();
  }

  /// Standard normal via Box-Muller. Draws two uniforms per call and keeps
  /// no cached spare, so the stream position is a pure function of the call
  /// count.
  double normal() {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  /// Uniform integer on [lo, hi] inclusive.
  std::int64_t uniformInt(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw std::invalid_argument("Rng::uniformInt: lo > hi");
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    // Rejection sampling to avoid modulo bias.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t r = gen_();
    while (r >= limit) r = gen_();
    return lo + static_cast<std::int64_t>(r % span);
  }

  std::uint64_t raw() { return gen_(); }

  /// Derives an independent child seed from a master seed and a stream tag
  /// (splitmix64 finalizer). Used to give every component of a run its own
  /// generator.
  static std::uint64_t deriveSeed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace numkit
}  // namespace famo2o
