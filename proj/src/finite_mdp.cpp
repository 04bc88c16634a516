#include "famo2o/envs/finite_mdp.hpp"

#include <stdexcept>

namespace famo2o {
namespace envs {

namespace {

using numkit::Mat;
using numkit::Vec;

void checkDistributionRows(const Mat& m, const char* what) {
  for (numkit::Index i = 0; i < m.rows(); ++i) {
    double sum = 0.0;
    for (numkit::Index j = 0; j < m.cols(); ++j) {
      if (m(i, j) < 0.0) {
        throw std::invalid_argument(std::string("FiniteMdp: negative entry in ") + what);
      }
      sum += m(i, j);
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw std::invalid_argument(std::string("FiniteMdp: row of ") + what +
                                  " does not sum to 1");
    }
  }
}

/// Row distribution with every entry at least FiniteMdp::kMinProb: a random
/// point on the simplex mixed with the uniform distribution.
numkit::Row randomDistributionRow(numkit::Index n, numkit::Rng& rng) {
  numkit::Row row(n);
  double sum = 0.0;
  for (numkit::Index i = 0; i < n; ++i) {
    row[i] = -std::log(1.0 - rng.uniform01());  // Exp(1) => Dirichlet(1) row
    sum += row[i];
  }
  const double floorMass = FiniteMdp::kMinProb * static_cast<double>(n);
  for (numkit::Index i = 0; i < n; ++i) {
    row[i] = (1.0 - floorMass) * (row[i] / sum) + FiniteMdp::kMinProb;
  }
  return row;
}

}  // namespace

void FiniteMdp::validate() const {
  if (n_states <= 0 || n_actions <= 0) {
    throw std::invalid_argument("FiniteMdp: non-positive sizes");
  }
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("FiniteMdp: gamma must lie in (0, 1)");
  }
  if (static_cast<int>(P.size()) != n_actions) {
    throw std::invalid_argument("FiniteMdp: wrong number of transition matrices");
  }
  for (const Mat& Pa : P) {
    if (Pa.rows() != n_states || Pa.cols() != n_states) {
      throw std::invalid_argument("FiniteMdp: transition matrix shape mismatch");
    }
    checkDistributionRows(Pa, "P");
  }
  if (R.rows() != n_states || R.cols() != n_actions) {
    throw std::invalid_argument("FiniteMdp: reward shape mismatch");
  }
  if (behavior.rows() != n_states || behavior.cols() != n_actions) {
    throw std::invalid_argument("FiniteMdp: behavior shape mismatch");
  }
  checkDistributionRows(behavior, "behavior");
}

FiniteMdp randomFiniteMdp(int n_states, int n_actions, double gamma,
                          numkit::Rng& rng) {
  FiniteMdp mdp;
  mdp.n_states = n_states;
  mdp.n_actions = n_actions;
  mdp.gamma = gamma;
  mdp.P.resize(n_actions);
  for (Mat& Pa : mdp.P) {
    Pa.resize(n_states, n_states);
    for (int s = 0; s < n_states; ++s) Pa.row(s) = randomDistributionRow(n_states, rng);
  }
  mdp.R.resize(n_states, n_actions);
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) mdp.R(s, a) = rng.uniform01();
  }
  mdp.behavior.resize(n_states, n_actions);
  for (int s = 0; s < n_states; ++s)
    mdp.behavior.row(s) = randomDistributionRow(n_actions, rng);
  mdp.validate();
  return mdp;
}

Vec policyStateValues(const FiniteMdp& mdp, const Mat& pi) {
  mdp.validate();
  checkDistributionRows(pi, "pi");
  const int S = mdp.n_states;
  Mat Ppi = Mat::Zero(S, S);
  Vec rpi = Vec::Zero(S);
  for (int a = 0; a < mdp.n_actions; ++a) {
    Ppi += pi.col(a).asDiagonal() * mdp.P[a];
    rpi += pi.col(a).cwiseProduct(mdp.R.col(a));
  }
  const Mat A = Mat::Identity(S, S) - mdp.gamma * Ppi;
  return A.partialPivLu().solve(rpi);
}

Mat policyActionValues(const FiniteMdp& mdp, const Mat& pi) {
  const Vec V = policyStateValues(mdp, pi);
  Mat Q(mdp.n_states, mdp.n_actions);
  for (int a = 0; a < mdp.n_actions; ++a) {
    Q.col(a) = mdp.R.col(a) + mdp.gamma * (mdp.P[a] * V);
  }
  return Q;
}

Vec discountedVisitation(const FiniteMdp& mdp, const Mat& pi) {
  mdp.validate();
  checkDistributionRows(pi, "pi");
  const int S = mdp.n_states;
  Mat Ppi = Mat::Zero(S, S);
  for (int a = 0; a < mdp.n_actions; ++a) {
    Ppi += pi.col(a).asDiagonal() * mdp.P[a];
  }
  const Vec d0 = Vec::Constant(S, 1.0 / S);
  const Mat A = Mat::Identity(S, S) - mdp.gamma * Ppi.transpose();
  Vec d = A.partialPivLu().solve((1.0 - mdp.gamma) * d0);
  const double sum = d.sum();
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::runtime_error("discountedVisitation: solve left unnormalized mass");
  }
  return d;
}

}  // namespace envs
}  // namespace famo2o
