#pragma once

#include "famo2o/numkit/adam.hpp"
#include "famo2o/numkit/mlp.hpp"
#include "famo2o/numkit/types.hpp"

namespace famo2o {
namespace algos {

/// Action-value network. Discrete actions use one output per action
/// (input: encoded observation); box actions use a scalar output over the
/// concatenated (observation, action) input.
struct QNetwork {
  enum class Kind { kDiscrete, kBox };

  numkit::Mlp net;
  Kind kind = Kind::kDiscrete;
  int n_actions = 0;  // discrete only
  int act_dim = 0;    // box only

  static QNetwork discrete(int obs_dim, const std::vector<numkit::Index>& hidden,
                           int n_actions, numkit::Rng& rng);
  static QNetwork box(int obs_dim, const std::vector<numkit::Index>& hidden,
                      int act_dim, numkit::Rng& rng);

  /// Discrete: all action values, n_actions x B.
  numkit::Mat allValues(const numkit::Mat& obs) const;

  /// Value of the stored (raw) action per column. Discrete raw actions are
  /// indices in a 1 x B matrix; box raw actions are act_dim x B env vectors.
  numkit::Row dataValues(const numkit::Mat& obs, const numkit::Mat& actRaw) const;
};

/// State-value network (scalar output).
struct VNetwork {
  numkit::Mlp net;

  static VNetwork make(int obs_dim, const std::vector<numkit::Index>& hidden,
                       numkit::Rng& rng);

  numkit::Row values(const numkit::Mat& obs) const;
};

/// Asymmetric squared loss |tau - 1{u<0}| * u^2 averaged over the batch,
/// with u = qData - V(obs). Returns the loss; update() also descends.
double expectileLoss(const VNetwork& v, const numkit::Mat& obs,
                     const numkit::Row& qData, double tau);
double expectileUpdate(VNetwork& v, numkit::Adam& opt, const numkit::Mat& obs,
                       const numkit::Row& qData, double tau);
/// d(loss)/d(net params) without the optimizer step, for gradient checks.
double expectileLossWithGrad(const VNetwork& v, const numkit::Mat& obs,
                             const numkit::Row& qData, double tau,
                             numkit::Mlp::Gradients* grad);

/// Mean squared error of Q(s, a_data) against fixed targets.
double tdLoss(const QNetwork& q, const numkit::Mat& obs,
              const numkit::Mat& actRaw, const numkit::Row& targets);
double tdUpdate(QNetwork& q, numkit::Adam& opt, const numkit::Mat& obs,
                const numkit::Mat& actRaw, const numkit::Row& targets);
double tdLossWithGrad(const QNetwork& q, const numkit::Mat& obs,
                      const numkit::Mat& actRaw, const numkit::Row& targets,
                      numkit::Mlp::Gradients* grad);

/// TD loss plus the conservative penalty
///   alphaCql * mean_i [ logsumexp_j Q(s_i, a_ij) - Q(s_i, a_i_data) ].
/// For box actions the logsumexp runs over `sampled` (act_dim x (B * M), M
/// actions per batch column); for discrete actions it enumerates all actions
/// exactly and `sampled` is ignored. alphaCql = 0 reduces both to tdLoss.
double cqlQLoss(const QNetwork& q, const numkit::Mat& obs,
                const numkit::Mat& actRaw, const numkit::Row& targets,
                const numkit::Mat& sampled, double alphaCql);
double cqlQUpdate(QNetwork& q, numkit::Adam& opt, const numkit::Mat& obs,
                  const numkit::Mat& actRaw, const numkit::Row& targets,
                  const numkit::Mat& sampled, double alphaCql);
double cqlQLossWithGrad(const QNetwork& q, const numkit::Mat& obs,
                        const numkit::Mat& actRaw, const numkit::Row& targets,
                        const numkit::Mat& sampled, double alphaCql,
                        numkit::Mlp::Gradients* grad);

/// target <- (1 - rho) * target + rho * online, layer by layer.
void softUpdate(numkit::Mlp& target, const numkit::Mlp& online, double rho);

}  // namespace algos
}  // namespace famo2o
