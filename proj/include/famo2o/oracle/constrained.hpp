#pragma once

#include <limits>
#include <vector>

#include "famo2o/envs/finite_mdp.hpp"
#include "famo2o/numkit/types.hpp"

namespace famo2o {
namespace oracle {

/// Exact advantages of the behavior policy via linear-solve policy
/// evaluation: A(s, a) = Q(s, a) - V(s). Rows satisfy
/// sum_a behavior(s, a) * A(s, a) = 0.
numkit::Mat behaviorAdvantages(const envs::FiniteMdp& mdp);

/// Exponentially tilted policy at one state:
/// p(a) = behavior(a) * exp(beta * adv(a)) / Z, computed stably. logZ is the
/// log partition after shifting advantages by their maximum (so it matches
/// exactly the expression used to rebuild the policy).
numkit::Vec tiltedPolicy(const numkit::Vec& behaviorRow, const numkit::Vec& advRow,
                         double beta, double* logZShifted = nullptr);

/// KL(tilted || behavior) at the given temperature; non-decreasing in beta.
double tiltedKl(const numkit::Vec& behaviorRow, const numkit::Vec& advRow,
                double beta);

/// Limit of the tilt as beta grows: behavior mass renormalized on the set of
/// maximal advantages (ties within kTieTol). Its KL is the largest reachable.
numkit::Vec greedyLimitPolicy(const numkit::Vec& behaviorRow,
                              const numkit::Vec& advRow);
double greedyLimitKl(const numkit::Vec& behaviorRow, const numkit::Vec& advRow);

constexpr double kTieTol = 1e-12;

struct BisectionConfig {
  double beta_lo = 0.0;
  double beta_hi = 1e6;
  double kl_tol = 1e-10;  // residual |KL(beta) - eps|
  int max_iter = 200;
};

/// Per-state piece of a constrained solution. beta is +infinity when the
/// constraint is loose enough to admit the greedy limit.
struct StateSolution {
  numkit::Vec policy;
  double beta = 0.0;
  double kl = 0.0;
  double logZShifted = 0.0;
  double advShift = 0.0;  // max advantage subtracted inside the tilt
};

struct ConstrainedSolution {
  std::vector<StateSolution> states;
  numkit::Vec visitation;  // discounted visitation of the behavior policy
  double objective = 0.0;  // sum_s d(s) sum_a pi(a|s) A(s, a)
};

/// Maximizes the advantage-weighted objective subject to a separate KL budget
/// per state: KL(pi(.|s) || behavior(.|s)) <= epsPerState[s]. Each state is an
/// independent one-dimensional bisection on the tilt temperature.
ConstrainedSolution solvePointwise(const envs::FiniteMdp& mdp,
                                   const numkit::Mat& A,
                                   const numkit::Vec& epsPerState,
                                   const BisectionConfig& cfg = {});

/// Maximizes the same objective subject to one aggregate budget
/// sum_s d(s) KL_s <= eps. A single shared temperature is bisected on the
/// aggregate KL.
ConstrainedSolution solveDistributional(const envs::FiniteMdp& mdp,
                                        const numkit::Mat& A, double eps,
                                        const BisectionConfig& cfg = {});

constexpr double kInfiniteBeta = std::numeric_limits<double>::infinity();

}  // namespace oracle
}  // namespace famo2o
