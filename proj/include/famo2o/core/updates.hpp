#pragma once

#include "famo2o/algos/values.hpp"
#include "famo2o/core/models.hpp"
#include "famo2o/numkit/adam.hpp"

namespace famo2o {
namespace core {

/// Advantage-tilted imitation weights w_i = min(exp(beta_i * (q_i - v_i)), cap).
/// A sample with a non-finite advantage gets weight zero and is counted as
/// skipped; an overflowing exponential simply lands on the cap.
numkit::Row imitationWeights(const numkit::Row& beta, const numkit::Row& q,
                             const numkit::Row& v, double cap,
                             numkit::ClampCounter* skipped = nullptr);

/// Weighted log-likelihood of stored actions under the conditional policy,
/// mean_i w_i * log pi(a_i | s_i, enc(beta_i)). Weights are treated as
/// constants. universalUpdate() takes one ascent step and returns the
/// pre-step objective.
double weightedLogLikelihood(const UniversalModel& u, const numkit::Mat& obs,
                             const numkit::Mat& actRaw, const numkit::Row& beta,
                             const numkit::Row& weights);
double universalUpdate(UniversalModel& u, numkit::Adam& opt,
                       const numkit::Mat& obs, const numkit::Mat& actRaw,
                       const numkit::Row& beta, const numkit::Row& weights);
/// Same objective, but fills `grad` with d(objective)/d(trunk params) instead
/// of stepping an optimizer. Useful for gradient checking.
double weightedLogLikelihoodWithGrad(const UniversalModel& u,
                                     const numkit::Mat& obs,
                                     const numkit::Mat& actRaw,
                                     const numkit::Row& beta,
                                     const numkit::Row& weights,
                                     numkit::Mlp::Gradients* grad);

/// Expected critic value of the two-stage policy,
///   mean_i Q(s_i, a(s_i, beta_i)),
/// where beta_i reparameterizes the balance model's latent Gaussian through
/// tanh (noiseBeta holds the unit normals; zeros give the latent mean) and
/// flows through the frozen universal model and critic. Softmax heads take
/// the exact expectation over actions; squashed heads reparameterize the
/// action with noiseAct (act_dim x B). balanceUpdate() ascends only the
/// balance model and returns the pre-step objective.
double balanceObjective(const BalanceModel& b, const UniversalModel& u,
                        const algos::QNetwork& q, const numkit::Mat& obs,
                        const numkit::Row& noiseBeta,
                        const numkit::Mat& noiseAct);
double balanceUpdate(BalanceModel& b, numkit::Adam& opt, const UniversalModel& u,
                     const algos::QNetwork& q, const numkit::Mat& obs,
                     const numkit::Row& noiseBeta, const numkit::Mat& noiseAct);
/// d(objective)/d(balance trunk params) without the optimizer step.
double balanceObjectiveWithGrad(const BalanceModel& b, const UniversalModel& u,
                                const algos::QNetwork& q, const numkit::Mat& obs,
                                const numkit::Row& noiseBeta,
                                const numkit::Mat& noiseAct,
                                numkit::Mlp::Gradients* grad);

/// Conservative policy improvement objective
///   mean_i [ alpha_i * Q(s_i, a_i) - log pi(a_i | s_i, enc(alpha_i)) ]
/// with a_i reparameterized from noiseAct for squashed heads and replaced by
/// the exact expectation (value plus entropy) for softmax heads. The update
/// ascends the universal model with the critic frozen.
double conservativePolicyObjective(const UniversalModel& u,
                                   const algos::QNetwork& q,
                                   const numkit::Mat& obs,
                                   const numkit::Row& alpha,
                                   const numkit::Mat& noiseAct);
double conservativePolicyUpdate(UniversalModel& u, numkit::Adam& opt,
                                const algos::QNetwork& q, const numkit::Mat& obs,
                                const numkit::Row& alpha,
                                const numkit::Mat& noiseAct);
/// d(objective)/d(universal trunk params) without the optimizer step.
double conservativePolicyObjectiveWithGrad(const UniversalModel& u,
                                           const algos::QNetwork& q,
                                           const numkit::Mat& obs,
                                           const numkit::Row& alpha,
                                           const numkit::Mat& noiseAct,
                                           numkit::Mlp::Gradients* grad);

}  // namespace core
}  // namespace famo2o
