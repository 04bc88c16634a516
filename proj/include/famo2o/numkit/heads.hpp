#pragma once

#include <cmath>
#include <stdexcept>

#include "famo2o/numkit/rng.hpp"
#include "famo2o/numkit/types.hpp"

namespace famo2o {
namespace numkit {

namespace softmax {

/// Numerically stable softmax over each column.
inline Mat probsFromLogits(const Mat& logits) {
  Mat p = (logits.rowwise() - logits.colwise().maxCoeff()).array().exp();
  p.array().rowwise() /= p.colwise().sum().array();
  return p;
}

/// log(sum(exp(column))) per column.
inline Row logSumExp(const Mat& logits) {
  Row mx = logits.colwise().maxCoeff();
  return mx.array() +
         (logits.rowwise() - mx).array().exp().colwise().sum().log();
}

inline Index sampleFromProbs(const Vec& probs, Rng& rng) {
  const double u = rng.uniform01();
  double acc = 0.0;
  for (Index i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return probs.size() - 1;
}

}  // namespace softmax

namespace gaussian {

constexpr double kLogStdMin = -5.0;
constexpr double kLogStdMax = 2.0;
constexpr double kHalfLog2Pi = 0.9189385332046727;  // log(2*pi)/2
constexpr double kTanhEps = 1e-6;

/// Clamps log-std entries into [kLogStdMin, kLogStdMax]. When mask is given
/// it receives 1 where the entry was interior (gradient passes) and 0 where
/// the clamp was active.
inline void clampLogStd(Mat& logStd, Mat* mask = nullptr) {
  if (mask != nullptr) {
    *mask = ((logStd.array() > kLogStdMin) && (logStd.array() < kLogStdMax))
                .cast<double>()
                .matrix();
  }
  logStd = logStd.array().max(kLogStdMin).min(kLogStdMax).matrix();
}

/// Diagonal-normal log density of each column of x, summed over dims.
inline Row logProb(const Mat& x, const Mat& mean, const Mat& logStd) {
  const auto z = (x - mean).array() / logStd.array().exp();
  return -(0.5 * z.square() + logStd.array() + kHalfLog2Pi).colwise().sum();
}

}  // namespace gaussian

/// Diagonal Gaussian over a trunk output laid out as [mean; logStd]. The
/// log-std half is clamped on construction.
struct GaussianHead {
  Vec mean;
  Vec logStd;

  static GaussianHead fromOutput(const Vec& trunkOut) {
    if (trunkOut.size() % 2 != 0) {
      throw std::invalid_argument("GaussianHead: trunk output dim must be even");
    }
    const Index d = trunkOut.size() / 2;
    GaussianHead h;
    h.mean = trunkOut.head(d);
    h.logStd = trunkOut.tail(d)
                   .array()
                   .max(gaussian::kLogStdMin)
                   .min(gaussian::kLogStdMax)
                   .matrix();
    return h;
  }

  Vec stddev() const { return logStd.array().exp().matrix(); }

  Vec sample(Rng& rng) const {
    Vec eps(mean.size());
    for (Index i = 0; i < eps.size(); ++i) eps[i] = rng.normal();
    return mean + stddev().cwiseProduct(eps);
  }

  double logProb(const Vec& x) const {
    const auto z = (x - mean).array() / logStd.array().exp();
    return -(0.5 * z.square() + logStd.array() + gaussian::kHalfLog2Pi).sum();
  }

  /// Sample squashed into the box [center - half, center + half], strictly
  /// interior thanks to tanh.
  Vec sampleSquashed(const Vec& center, const Vec& half, Rng& rng) const {
    return center + half.cwiseProduct(sample(rng).array().tanh().matrix());
  }

  /// Log density of a boxed action under the squashed distribution. The
  /// action is pulled back through atanh with a small clamp away from the
  /// boundary for numeric safety.
  double logProbSquashed(const Vec& center, const Vec& half,
                         const Vec& action) const {
    const Index d = mean.size();
    Vec u(d);
    double corr = 0.0;
    for (Index i = 0; i < d; ++i) {
      double t = (action[i] - center[i]) / half[i];
      t = std::min(1.0 - gaussian::kTanhEps, std::max(-1.0 + gaussian::kTanhEps, t));
      u[i] = std::atanh(t);
      corr += std::log(half[i] * (1.0 - t * t) + gaussian::kTanhEps);
    }
    return logProb(u) - corr;
  }
};

/// Categorical head over logits.
struct SoftmaxHead {
  Vec logits;

  Vec probs() const {
    Vec p = (logits.array() - logits.maxCoeff()).exp();
    return p / p.sum();
  }

  Index sample(Rng& rng) const { return softmax::sampleFromProbs(probs(), rng); }

  double logProb(Index a) const {
    if (a < 0 || a >= logits.size()) {
      throw std::invalid_argument("SoftmaxHead::logProb: action out of range");
    }
    const double mx = logits.maxCoeff();
    const double lz = mx + std::log((logits.array() - mx).exp().sum());
    return logits[a] - lz;
  }

  Index argmax() const {
    Index a = 0;
    logits.maxCoeff(&a);
    return a;
  }
};

}  // namespace numkit
}  // namespace famo2o
