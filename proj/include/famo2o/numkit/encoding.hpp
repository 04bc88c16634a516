#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "famo2o/numkit/types.hpp"

namespace famo2o {
namespace numkit {

/// Closed interval of balance coefficients plus how they are fed to the
/// universal model. Coefficients enter the network through a sinusoidal
/// positional encoding so that they cannot be drowned out by the state
/// features; `normalize` optionally rescales the coefficient to [0, 1]
/// before encoding instead of encoding the raw value.
struct BalanceSpace {
  double beta_min = 1.0;
  double beta_max = 5.0;
  int enc_dim = 8;
  bool normalize = false;

  void validate() const {
    if (!(beta_min > 0.0)) {
      throw std::invalid_argument("BalanceSpace: beta_min must be > 0");
    }
    if (!(beta_max >= beta_min)) {
      throw std::invalid_argument("BalanceSpace: beta_max must be >= beta_min");
    }
    if (enc_dim <= 0 || enc_dim % 2 != 0) {
      throw std::invalid_argument("BalanceSpace: enc_dim must be positive and even");
    }
  }

  double clamp(double beta) const {
    return std::min(beta_max, std::max(beta_min, beta));
  }

  double midpoint() const { return 0.5 * (beta_min + beta_max); }
};

/// enc[2i] = sin(b / 10000^(2i/dim)), enc[2i+1] = cos(b / 10000^(2i/dim)),
/// where b is the (possibly normalized) clamped coefficient.
inline void encodeBalanceInto(double beta, const BalanceSpace& space,
                              Eigen::Ref<Vec> out,
                              ClampCounter* counter = nullptr) {
  if (out.size() != space.enc_dim) {
    throw std::invalid_argument("encodeBalanceInto: output dim mismatch");
  }
  double b = beta;
  if (b < space.beta_min || b > space.beta_max) {
    if (counter != nullptr) ++counter->count;
    b = space.clamp(b);
  }
  if (space.normalize) {
    const double span = space.beta_max - space.beta_min;
    b = span > 0.0 ? (b - space.beta_min) / span : 0.0;
  }
  const int dim = space.enc_dim;
  for (int i = 0; 2 * i < dim; ++i) {
    const double freq = std::pow(10000.0, -2.0 * i / dim);
    out[2 * i] = std::sin(b * freq);
    out[2 * i + 1] = std::cos(b * freq);
  }
}

inline Vec encodeBalance(double beta, const BalanceSpace& space,
                         ClampCounter* counter = nullptr) {
  Vec out(space.enc_dim);
  encodeBalanceInto(beta, space, out, counter);
  return out;
}

/// Derivative of the encoding with respect to the raw coefficient. Zero
/// outside the space (the clamp is flat there).
inline Vec encodeBalanceGrad(double beta, const BalanceSpace& space) {
  Vec g = Vec::Zero(space.enc_dim);
  if (beta < space.beta_min || beta > space.beta_max) return g;
  double b = beta;
  double scale = 1.0;
  if (space.normalize) {
    const double span = space.beta_max - space.beta_min;
    scale = span > 0.0 ? 1.0 / span : 0.0;
    b = span > 0.0 ? (b - space.beta_min) / span : 0.0;
  }
  const int dim = space.enc_dim;
  for (int i = 0; 2 * i < dim; ++i) {
    const double freq = std::pow(10000.0, -2.0 * i / dim);
    g[2 * i] = std::cos(b * freq) * freq * scale;
    g[2 * i + 1] = -std::sin(b * freq) * freq * scale;
  }
  return g;
}

}  // namespace numkit
}  // namespace famo2o
