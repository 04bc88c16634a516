#pragma once

// Shared helpers for the test binaries: finite-difference gradients against
// the flat parameter vector, a one-sample Kolmogorov-Smirnov test against a
// uniform law, simplex grids for brute-force policy searches, and small file
// utilities. Everything here is independent of the code under test so it can
// serve as an oracle for it.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "famo2o/numkit/mlp.hpp"
#include "famo2o/numkit/types.hpp"

namespace testsupport {

/// Central finite differences of `value` (any callable returning double that
/// depends on the network's parameters) over every flat parameter of `net`.
/// Restores the parameters afterwards.
template <typename F>
famo2o::numkit::Vec fdGradient(famo2o::numkit::Mlp& net, F&& value,
                               double h = 1e-5) {
  famo2o::numkit::Vec theta = net.flatten();
  famo2o::numkit::Vec g(theta.size());
  for (famo2o::numkit::Index i = 0; i < theta.size(); ++i) {
    const double orig = theta(i);
    theta(i) = orig + h;
    net.setFlat(theta);
    const double fp = value();
    theta(i) = orig - h;
    net.setFlat(theta);
    const double fm = value();
    theta(i) = orig;
    g(i) = (fp - fm) / (2.0 * h);
  }
  net.setFlat(theta);
  return g;
}

/// Relative error between two gradient vectors, normalized by the larger
/// norm (so it is symmetric and stable when both are small).
inline double gradientRelError(const famo2o::numkit::Vec& a,
                               const famo2o::numkit::Vec& b) {
  const double denom = std::max({a.norm(), b.norm(), 1e-12});
  return (a - b).norm() / denom;
}

/// Asymptotic Kolmogorov survival function
///   Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2).
inline double kolmogorovQ(double lambda) {
  if (lambda < 1e-8) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * double(k) * double(k) * lambda * lambda);
    sum += sign * term;
    sign = -sign;
    if (term < 1e-16) break;
  }
  return std::min(1.0, std::max(0.0, 2.0 * sum));
}

/// One-sample KS test p-value of `xs` against Uniform(lo, hi), using the
/// Stephens small-sample correction lambda = (sqrt(n) + 0.12 + 0.11/sqrt(n)) D.
inline double ksUniformPValue(std::vector<double> xs, double lo, double hi) {
  if (xs.empty() || !(hi > lo))
    throw std::invalid_argument("ksUniformPValue: bad input");
  std::sort(xs.begin(), xs.end());
  const double n = double(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double cdf = std::min(1.0, std::max(0.0, (xs[i] - lo) / (hi - lo)));
    d = std::max(d, cdf - double(i) / n);
    d = std::max(d, double(i + 1) / n - cdf);
  }
  const double sn = std::sqrt(n);
  return kolmogorovQ((sn + 0.12 + 0.11 / sn) * d);
}

/// All probability vectors with k entries on the grid {0, 1/n, ..., 1}
/// (compositions of n into k parts, normalized).
inline std::vector<famo2o::numkit::Vec> simplexGrid(int k, int n) {
  std::vector<famo2o::numkit::Vec> out;
  famo2o::numkit::Vec p(k);
  std::vector<int> counts(std::size_t(k), 0);
  // Iterative enumeration of compositions.
  const std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == k - 1) {
      counts[std::size_t(pos)] = left;
      for (int i = 0; i < k; ++i) p(i) = double(counts[std::size_t(i)]) / double(n);
      out.push_back(p);
      return;
    }
    for (int c = 0; c <= left; ++c) {
      counts[std::size_t(pos)] = c;
      rec(pos + 1, left - c);
    }
  };
  rec(0, n);
  return out;
}

/// Smallest n whose composition count C(n+k-1, k-1) reaches `minPoints`.
inline int simplexGridResolution(int k, long minPoints) {
  for (int n = 1;; ++n) {
    long count = 1;
    for (int i = 1; i < k; ++i) count = count * (n + i) / i;
    if (count >= minPoints) return n;
  }
}

inline std::string readFileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace testsupport
