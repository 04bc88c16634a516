#pragma once

#include <vector>

#include "famo2o/numkit/rng.hpp"
#include "famo2o/numkit/types.hpp"

namespace famo2o {
namespace envs {

/// Tabular MDP with a reference (behavior) policy attached. P[a](s, s') is
/// the probability of landing in s' after action a in state s; rows sum to 1
/// with every entry at least kMinProb. Used by the certification oracle.
struct FiniteMdp {
  int n_states = 0;
  int n_actions = 0;
  double gamma = 0.99;
  std::vector<numkit::Mat> P;  // one n_states x n_states matrix per action
  numkit::Mat R;               // n_states x n_actions
  numkit::Mat behavior;        // pi_beta: n_states x n_actions, rows sum to 1

  static constexpr double kMinProb = 1e-3;

  void validate() const;
};

/// Random instance: transition rows and behavior rows are Dirichlet-style
/// draws mixed with the uniform distribution so every probability is at
/// least kMinProb; rewards are uniform on [0, 1].
FiniteMdp randomFiniteMdp(int n_states, int n_actions, double gamma,
                          numkit::Rng& rng);

/// State-value function of a policy (n_states x n_actions, rows summing
/// to 1) by direct linear solve of the Bellman equations.
numkit::Vec policyStateValues(const FiniteMdp& mdp, const numkit::Mat& pi);

/// Action-value function of a policy.
numkit::Mat policyActionValues(const FiniteMdp& mdp, const numkit::Mat& pi);

/// Normalized discounted state visitation of a policy under the uniform
/// initial distribution: d = (1 - gamma) * sum_t gamma^t d_t, computed by a
/// linear solve. Sums to 1.
numkit::Vec discountedVisitation(const FiniteMdp& mdp, const numkit::Mat& pi);

}  // namespace envs
}  // namespace famo2o
