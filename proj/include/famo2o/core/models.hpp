#pragma once

#include "famo2o/numkit/encoding.hpp"
#include "famo2o/numkit/heads.hpp"
#include "famo2o/numkit/mlp.hpp"
#include "famo2o/numkit/rng.hpp"
#include "famo2o/numkit/types.hpp"

namespace famo2o {
namespace core {

/// Conditional policy pi(a | s, enc(beta)): one trunk over the concatenated
/// observation and encoded balance coefficient, with either a categorical
/// head (logits per action) or a tanh-squashed diagonal Gaussian head over a
/// box [center - half, center + half].
struct UniversalModel {
  enum class Head { kSoftmax, kSquashedGaussian };

  numkit::Mlp trunk;
  Head head = Head::kSoftmax;
  numkit::BalanceSpace space;
  int obs_dim = 0;
  int n_actions = 0;             // softmax head
  numkit::Vec action_center;     // squashed head
  numkit::Vec action_half;

  static UniversalModel discrete(int obs_dim,
                                 const std::vector<numkit::Index>& hidden,
                                 int n_actions, const numkit::BalanceSpace& space,
                                 numkit::Rng& rng);
  static UniversalModel box(int obs_dim, const std::vector<numkit::Index>& hidden,
                            const numkit::Vec& center, const numkit::Vec& half,
                            const numkit::BalanceSpace& space, numkit::Rng& rng);

  int actDim() const { return head == Head::kSoftmax ? 1 : int(action_center.size()); }

  /// Trunk input [obs; enc(beta)] for one sample / a whole batch (beta per
  /// column). Out-of-range coefficients are clamped and counted.
  numkit::Vec input(const numkit::Vec& obs, double beta,
                    numkit::ClampCounter* counter = nullptr) const;
  numkit::Mat inputBatch(const numkit::Mat& obs, const numkit::Row& beta,
                         numkit::ClampCounter* counter = nullptr) const;

  numkit::SoftmaxHead softmaxAt(const numkit::Vec& obs, double beta) const;
  numkit::GaussianHead gaussianAt(const numkit::Vec& obs, double beta) const;

  /// Action in environment units: a 1-vector action index for the softmax
  /// head, a point inside the box for the squashed head.
  numkit::Vec sampleAction(const numkit::Vec& obs, double beta,
                           numkit::Rng& rng) const;
  numkit::Vec modeAction(const numkit::Vec& obs, double beta) const;

  /// Log density (softmax: log probability) of an environment-unit action.
  double logProb(const numkit::Vec& obs, double beta,
                 const numkit::Vec& actionRaw) const;
};

/// State-conditional distribution over balance coefficients. A scalar
/// Gaussian latent is squashed through tanh onto [beta_min, beta_max], so a
/// sampled coefficient always lies inside the space. Both output biases start
/// at -1: the mean bias makes the initial coefficients conservative (near
/// beta_min), the log-std bias keeps early samples away from the tanh
/// saturation zone.
struct BalanceModel {
  numkit::Mlp trunk;  // obs -> [latent mean; latent log-std]
  numkit::BalanceSpace space;

  static BalanceModel make(int obs_dim, const std::vector<numkit::Index>& hidden,
                           const numkit::BalanceSpace& space, numkit::Rng& rng);

  double betaFromLatent(double x) const {
    return space.beta_min +
           (space.beta_max - space.beta_min) * 0.5 * (std::tanh(x) + 1.0);
  }

  double sampleBeta(const numkit::Vec& obs, numkit::Rng& rng) const;
  double meanBeta(const numkit::Vec& obs) const;
};

struct ActResult {
  numkit::Vec action;
  double beta = 0.0;
};

/// Two-stage action selection: the balance model picks the coefficient, the
/// universal model acts under it. Deterministic mode takes the latent mean
/// and the policy mode; stochastic mode samples both.
ActResult act(const UniversalModel& u, const BalanceModel& b,
              const numkit::Vec& obs, bool deterministic, numkit::Rng* rng);

}  // namespace core
}  // namespace famo2o
