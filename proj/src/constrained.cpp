#include "famo2o/oracle/constrained.hpp"

#include <cmath>
#include <stdexcept>

namespace famo2o {
namespace oracle {

namespace {

using numkit::Mat;
using numkit::Vec;

double klBetween(const Vec& p, const Vec& q) {
  double kl = 0.0;
  for (numkit::Index i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) kl += p[i] * std::log(p[i] / q[i]);
  }
  return kl;
}

double advantageSpread(const Vec& advRow) {
  return advRow.maxCoeff() - advRow.minCoeff();
}

StateSolution solveState(const Vec& behaviorRow, const Vec& advRow, double eps,
                         const BisectionConfig& cfg) {
  StateSolution sol;
  if (eps < 0.0) throw std::invalid_argument("solveState: negative KL budget");

  // Flat advantages: every tilt equals the behavior policy.
  if (advantageSpread(advRow) < kTieTol) {
    sol.policy = behaviorRow;
    sol.beta = 0.0;
    sol.kl = 0.0;
    sol.advShift = advRow.maxCoeff();
    sol.logZShifted = std::log(
        behaviorRow.dot((advRow.array() - sol.advShift).exp().matrix()));
    return sol;
  }

  const double klMax = greedyLimitKl(behaviorRow, advRow);
  if (eps >= klMax) {
    sol.policy = greedyLimitPolicy(behaviorRow, advRow);
    sol.beta = kInfiniteBeta;
    sol.kl = klMax;
    sol.advShift = advRow.maxCoeff();
    // After shifting by the max advantage, the partition function tends to
    // the behavior mass of the argmax set as beta grows.
    double mass = 0.0;
    for (numkit::Index a = 0; a < advRow.size(); ++a) {
      if (advRow[a] >= sol.advShift - kTieTol) mass += behaviorRow[a];
    }
    sol.logZShifted = std::log(mass);
    return sol;
  }

  double lo = cfg.beta_lo, hi = cfg.beta_hi;
  double klHi = tiltedKl(behaviorRow, advRow, hi);
  if (klHi <= eps) {
    // Crossing lies beyond the bracket; the bracket edge is still feasible
    // and within numeric dust of the constrained optimum.
    sol.beta = hi;
    sol.policy = tiltedPolicy(behaviorRow, advRow, hi, &sol.logZShifted);
    sol.kl = klHi;
    sol.advShift = advRow.maxCoeff();
    return sol;
  }
  double beta = hi;
  for (int it = 0; it < cfg.max_iter; ++it) {
    beta = 0.5 * (lo + hi);
    const double kl = tiltedKl(behaviorRow, advRow, beta);
    if (std::abs(kl - eps) <= cfg.kl_tol) break;
    if (kl > eps) {
      hi = beta;
    } else {
      lo = beta;
    }
  }
  sol.beta = beta;
  sol.policy = tiltedPolicy(behaviorRow, advRow, beta, &sol.logZShifted);
  sol.kl = klBetween(sol.policy, behaviorRow);
  sol.advShift = advRow.maxCoeff();
  return sol;
}

ConstrainedSolution assemble(const envs::FiniteMdp& mdp, const Mat& A,
                             std::vector<StateSolution> states) {
  ConstrainedSolution out;
  out.visitation = envs::discountedVisitation(mdp, mdp.behavior);
  out.states = std::move(states);
  out.objective = 0.0;
  for (int s = 0; s < mdp.n_states; ++s) {
    out.objective += out.visitation[s] * out.states[s].policy.dot(A.row(s));
  }
  return out;
}

void checkShapes(const envs::FiniteMdp& mdp, const Mat& A) {
  mdp.validate();
  if (A.rows() != mdp.n_states || A.cols() != mdp.n_actions) {
    throw std::invalid_argument("constrained solve: advantage shape mismatch");
  }
}

}  // namespace

Mat behaviorAdvantages(const envs::FiniteMdp& mdp) {
  const Mat Q = envs::policyActionValues(mdp, mdp.behavior);
  const Vec V = (Q.array() * mdp.behavior.array()).rowwise().sum();
  return Q.colwise() - V;
}

Vec tiltedPolicy(const Vec& behaviorRow, const Vec& advRow, double beta,
                 double* logZShifted) {
  const Vec shifted = (advRow.array() - advRow.maxCoeff()).matrix();
  const Vec w = behaviorRow.cwiseProduct((beta * shifted.array()).exp().matrix());
  const double Z = w.sum();
  if (logZShifted != nullptr) *logZShifted = std::log(Z);
  return w / Z;
}

double tiltedKl(const Vec& behaviorRow, const Vec& advRow, double beta) {
  return klBetween(tiltedPolicy(behaviorRow, advRow, beta), behaviorRow);
}

Vec greedyLimitPolicy(const Vec& behaviorRow, const Vec& advRow) {
  const double mx = advRow.maxCoeff();
  Vec p = Vec::Zero(behaviorRow.size());
  double mass = 0.0;
  for (numkit::Index a = 0; a < advRow.size(); ++a) {
    if (advRow[a] >= mx - kTieTol) {
      p[a] = behaviorRow[a];
      mass += behaviorRow[a];
    }
  }
  return p / mass;
}

double greedyLimitKl(const Vec& behaviorRow, const Vec& advRow) {
  double mass = 0.0;
  const double mx = advRow.maxCoeff();
  for (numkit::Index a = 0; a < advRow.size(); ++a) {
    if (advRow[a] >= mx - kTieTol) mass += behaviorRow[a];
  }
  return -std::log(mass);
}

ConstrainedSolution solvePointwise(const envs::FiniteMdp& mdp, const Mat& A,
                                   const Vec& epsPerState,
                                   const BisectionConfig& cfg) {
  checkShapes(mdp, A);
  if (epsPerState.size() != mdp.n_states) {
    throw std::invalid_argument("solvePointwise: budget vector size mismatch");
  }
  std::vector<StateSolution> states;
  states.reserve(mdp.n_states);
  for (int s = 0; s < mdp.n_states; ++s) {
    states.push_back(solveState(mdp.behavior.row(s), A.row(s), epsPerState[s], cfg));
  }
  return assemble(mdp, A, std::move(states));
}

ConstrainedSolution solveDistributional(const envs::FiniteMdp& mdp, const Mat& A,
                                        double eps, const BisectionConfig& cfg) {
  checkShapes(mdp, A);
  if (eps < 0.0) throw std::invalid_argument("solveDistributional: negative budget");
  const Vec d = envs::discountedVisitation(mdp, mdp.behavior);

  const auto aggregateKl = [&](double beta) {
    double total = 0.0;
    for (int s = 0; s < mdp.n_states; ++s) {
      total += d[s] * tiltedKl(mdp.behavior.row(s), A.row(s), beta);
    }
    return total;
  };

  double aggMax = 0.0;
  for (int s = 0; s < mdp.n_states; ++s) {
    const Vec adv = A.row(s);
    if (advantageSpread(adv) >= kTieTol) {
      aggMax += d[s] * greedyLimitKl(mdp.behavior.row(s), adv);
    }
  }

  double beta;
  bool greedy = false;
  if (eps >= aggMax) {
    greedy = true;
    beta = kInfiniteBeta;
  } else if (aggregateKl(cfg.beta_hi) <= eps) {
    beta = cfg.beta_hi;
  } else {
    double lo = cfg.beta_lo, hi = cfg.beta_hi;
    beta = hi;
    for (int it = 0; it < cfg.max_iter; ++it) {
      beta = 0.5 * (lo + hi);
      const double kl = aggregateKl(beta);
      if (std::abs(kl - eps) <= cfg.kl_tol) break;
      if (kl > eps) {
        hi = beta;
      } else {
        lo = beta;
      }
    }
  }

  std::vector<StateSolution> states;
  states.reserve(mdp.n_states);
  for (int s = 0; s < mdp.n_states; ++s) {
    const Vec behaviorRow = mdp.behavior.row(s);
    const Vec advRow = A.row(s);
    StateSolution sol;
    sol.advShift = advRow.maxCoeff();
    if (greedy) {
      if (advantageSpread(advRow) < kTieTol) {
        sol.policy = behaviorRow;
        sol.beta = kInfiniteBeta;
        sol.kl = 0.0;
        sol.logZShifted = std::log(
            behaviorRow.dot((advRow.array() - sol.advShift).exp().matrix()));
      } else {
        sol.policy = greedyLimitPolicy(behaviorRow, advRow);
        sol.beta = kInfiniteBeta;
        sol.kl = greedyLimitKl(behaviorRow, advRow);
        double mass = 0.0;
        for (numkit::Index a = 0; a < advRow.size(); ++a) {
          if (advRow[a] >= sol.advShift - kTieTol) mass += behaviorRow[a];
        }
        sol.logZShifted = std::log(mass);
      }
    } else {
      sol.beta = beta;
      sol.policy = tiltedPolicy(behaviorRow, advRow, beta, &sol.logZShifted);
      sol.kl = klBetween(sol.policy, behaviorRow);
    }
    states.push_back(std::move(sol));
  }
  return assemble(mdp, A, std::move(states));
}

}  // namespace oracle
}  // namespace famo2o
