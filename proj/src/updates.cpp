#include "famo2o/core/updates.hpp"

#include <cmath>
#include <stdexcept>

namespace famo2o {
namespace core {

using numkit::Index;
using numkit::Mat;
using numkit::Mlp;
using numkit::Row;
using numkit::Vec;

namespace {

constexpr double kTanhEps = numkit::gaussian::kTanhEps;

/// Batched split of a squashed-Gaussian trunk output into clamped mean /
/// log-std halves, with the clamp mask and derived quantities.
struct GaussianBatch {
  Mat mean, logStd, mask, std;
};

GaussianBatch splitGaussian(const Mat& out) {
  if (out.rows() % 2 != 0)
    throw std::invalid_argument("squashed head needs an even trunk output dim");
  GaussianBatch g;
  const Index d = out.rows() / 2;
  g.mean = out.topRows(d);
  g.logStd = out.bottomRows(d);
  numkit::gaussian::clampLogStd(g.logStd, &g.mask);
  g.std = g.logStd.array().exp().matrix();
  return g;
}

void checkBatchSizes(const Mat& obs, const Row& beta) {
  if (beta.size() != obs.cols())
    throw std::invalid_argument("coefficient row does not match batch size");
  if (obs.cols() == 0) throw std::invalid_argument("empty batch");
}

/// Weighted log-likelihood forward pass. Fills dY (ascent direction w.r.t.
/// the trunk output) when requested.
double likelihoodCore(const UniversalModel& u, const Mat& obs, const Mat& actRaw,
                      const Row& beta, const Row& weights, Mlp::Workspace& ws,
                      Mat* dY) {
  checkBatchSizes(obs, beta);
  if (weights.size() != obs.cols())
    throw std::invalid_argument("weight row does not match batch size");
  const Index B = obs.cols();
  const double invB = 1.0 / static_cast<double>(B);
  const Mat X = u.inputBatch(obs, beta);
  const Mat& out = u.trunk.forward(X, ws);

  if (u.head == UniversalModel::Head::kSoftmax) {
    const Mat P = numkit::softmax::probsFromLogits(out);
    const Row lse = numkit::softmax::logSumExp(out);
    if (dY != nullptr) *dY = Mat::Zero(out.rows(), B);
    double obj = 0.0;
    for (Index i = 0; i < B; ++i) {
      const auto a = static_cast<Index>(actRaw(0, i));
      if (a < 0 || a >= out.rows())
        throw std::out_of_range("action index out of range in likelihood");
      obj += weights(i) * (out(a, i) - lse(i)) * invB;
      if (dY != nullptr) {
        dY->col(i) = -(weights(i) * invB) * P.col(i);
        (*dY)(a, i) += weights(i) * invB;
      }
    }
    return obj;
  }

  // Squashed Gaussian: pull data actions back through atanh and score them
  // under the pre-squash normal, with the tanh volume correction.
  const GaussianBatch g = splitGaussian(out);
  const Index d = g.mean.rows();
  if (actRaw.rows() != d)
    throw std::invalid_argument("action dim mismatch in likelihood");
  Mat U(d, B);
  Row corr = Row::Zero(B);
  for (Index i = 0; i < B; ++i) {
    for (Index k = 0; k < d; ++k) {
      double t = (actRaw(k, i) - u.action_center(k)) / u.action_half(k);
      t = std::min(1.0 - kTanhEps, std::max(-1.0 + kTanhEps, t));
      U(k, i) = std::atanh(t);
      corr(i) += std::log(u.action_half(k) * (1.0 - t * t) + kTanhEps);
    }
  }
  const Mat Z = (U - g.mean).cwiseQuotient(g.std);
  const Row logp =
      (-(0.5 * Z.array().square() + g.logStd.array() +
         numkit::gaussian::kHalfLog2Pi)
            .colwise()
            .sum() -
       corr.array())
          .matrix();
  const double obj = (weights.array() * logp.array()).sum() * invB;
  if (dY != nullptr) {
    dY->resize(2 * d, B);
    const Row wScaled = (weights * invB);
    const Mat dMean = Z.cwiseQuotient(g.std) * wScaled.asDiagonal();
    const Mat dLogStd = ((Z.array().square() - 1.0).matrix() * wScaled.asDiagonal())
                            .cwiseProduct(g.mask);
    dY->topRows(d) = dMean;
    dY->bottomRows(d) = dLogStd;
  }
  return obj;
}

/// Squashed-action forward pieces shared by the balance and conservative
/// objectives: the reparameterized action and its chain factors.
struct SquashedAction {
  Mat uu;    // pre-squash sample mean + std .* eps
  Mat tanh;  // tanh(uu)
  Mat act;   // center + half .* tanh(uu)
  Mat w1;    // half .* (1 - tanh^2), the action/pre-squash Jacobian diagonal
};

SquashedAction reparamAction(const UniversalModel& u, const GaussianBatch& g,
                             const Mat& noiseAct) {
  if (noiseAct.rows() != g.mean.rows() || noiseAct.cols() != g.mean.cols())
    throw std::invalid_argument("action noise shape mismatch");
  SquashedAction s;
  s.uu = g.mean + g.std.cwiseProduct(noiseAct);
  s.tanh = s.uu.array().tanh().matrix();
  s.act = ((s.tanh.array().colwise() * u.action_half.array()).colwise() +
           u.action_center.array())
              .matrix();
  s.w1 = ((1.0 - s.tanh.array().square()).colwise() * u.action_half.array())
             .matrix();
  return s;
}

}  // namespace

Row imitationWeights(const Row& beta, const Row& q, const Row& v, double cap,
                     numkit::ClampCounter* skipped) {
  if (beta.size() != q.size() || q.size() != v.size())
    throw std::invalid_argument("imitationWeights: size mismatch");
  if (cap <= 0.0) throw std::invalid_argument("imitationWeights: cap must be > 0");
  Row w(beta.size());
  for (Index i = 0; i < beta.size(); ++i) {
    const double adv = q(i) - v(i);
    if (!std::isfinite(adv) || !std::isfinite(beta(i))) {
      w(i) = 0.0;
      if (skipped != nullptr) ++skipped->count;
      continue;
    }
    w(i) = std::min(std::exp(beta(i) * adv), cap);
  }
  return w;
}

double weightedLogLikelihood(const UniversalModel& u, const Mat& obs,
                             const Mat& actRaw, const Row& beta,
                             const Row& weights) {
  Mlp::Workspace ws;
  return likelihoodCore(u, obs, actRaw, beta, weights, ws, nullptr);
}

double universalUpdate(UniversalModel& u, numkit::Adam& opt, const Mat& obs,
                       const Mat& actRaw, const Row& beta, const Row& weights) {
  Mlp::Workspace ws;
  Mat dY;
  const double obj = likelihoodCore(u, obs, actRaw, beta, weights, ws, &dY);
  Mlp::Gradients grads = u.trunk.zeroGradients();
  u.trunk.backward(ws, -dY, &grads);  // descend the negated objective
  opt.step(u.trunk, grads);
  return obj;
}

double weightedLogLikelihoodWithGrad(const UniversalModel& u, const Mat& obs,
                                     const Mat& actRaw, const Row& beta,
                                     const Row& weights,
                                     Mlp::Gradients* grad) {
  Mlp::Workspace ws;
  Mat dY;
  const double obj = likelihoodCore(u, obs, actRaw, beta, weights, ws, &dY);
  *grad = u.trunk.zeroGradients();
  u.trunk.backward(ws, dY, grad);
  return obj;
}

namespace {

/// Balance objective forward/backward. When dLatent != nullptr it receives
/// the ascent gradient w.r.t. the balance trunk output [latent mean;
/// latent log-std] (2 x B), with wsB holding the balance forward pass.
double balanceCore(const BalanceModel& b, const UniversalModel& u,
                   const algos::QNetwork& q, const Mat& obs,
                   const Row& noiseBeta, const Mat& noiseAct,
                   Mlp::Workspace& wsB, Mat* dLatent) {
  if (noiseBeta.size() != obs.cols())
    throw std::invalid_argument("coefficient noise does not match batch size");
  if (obs.cols() == 0) throw std::invalid_argument("empty batch");
  const Index B = obs.cols();
  const double invB = 1.0 / static_cast<double>(B);
  const double span = b.space.beta_max - b.space.beta_min;

  const Mat& outB = b.trunk.forward(obs, wsB);
  Row latentMean = outB.row(0);
  Row latentLogStd = outB.row(1);
  Row maskB = Row::Ones(B);
  for (Index i = 0; i < B; ++i) {
    if (latentLogStd(i) <= numkit::gaussian::kLogStdMin ||
        latentLogStd(i) >= numkit::gaussian::kLogStdMax) {
      maskB(i) = 0.0;
      latentLogStd(i) = std::min(numkit::gaussian::kLogStdMax,
                                 std::max(numkit::gaussian::kLogStdMin,
                                          latentLogStd(i)));
    }
  }
  const Row latentStd = latentLogStd.array().exp().matrix();
  const Row x =
      (latentMean.array() + latentStd.array() * noiseBeta.array()).matrix();
  const Row tau = x.array().tanh().matrix();
  const Row betaRow =
      (b.space.beta_min + (span * 0.5) * (tau.array() + 1.0)).matrix();

  const Mat X = u.inputBatch(obs, betaRow);
  Mlp::Workspace wsU;
  const Mat& outU = u.trunk.forward(X, wsU);

  double obj = 0.0;
  Mat dYu;  // ascent gradient w.r.t. the universal trunk output
  const bool wantGrad = dLatent != nullptr;

  if (u.head == UniversalModel::Head::kSoftmax) {
    const Mat P = numkit::softmax::probsFromLogits(outU);
    const Mat Qall = q.allValues(obs);  // frozen critic, depends on obs only
    if (wantGrad) dYu.resize(outU.rows(), B);
    for (Index i = 0; i < B; ++i) {
      const double ev = P.col(i).dot(Qall.col(i));
      obj += ev * invB;
      if (wantGrad)
        dYu.col(i) =
            invB * P.col(i).cwiseProduct(Qall.col(i) - Vec::Constant(Qall.rows(), ev));
    }
  } else {
    const GaussianBatch g = splitGaussian(outU);
    const SquashedAction s = reparamAction(u, g, noiseAct);
    Mat qin(obs.rows() + s.act.rows(), B);
    qin.topRows(obs.rows()) = obs;
    qin.bottomRows(s.act.rows()) = s.act;
    Mlp::Workspace wsQ;
    const Mat& qv = q.net.forward(qin, wsQ);
    obj = qv.row(0).sum() * invB;
    if (wantGrad) {
      Mat dQin;
      const Mat dQout = Mat::Constant(1, B, invB);
      q.net.backward(wsQ, dQout, nullptr, &dQin);
      const Mat dAct = dQin.bottomRows(s.act.rows());
      const Mat dUu = dAct.cwiseProduct(s.w1);
      dYu.resize(outU.rows(), B);
      dYu.topRows(g.mean.rows()) = dUu;
      dYu.bottomRows(g.mean.rows()) =
          dUu.cwiseProduct(g.std.cwiseProduct(noiseAct)).cwiseProduct(g.mask);
    }
  }

  if (!wantGrad) return obj;

  Mat dXu;
  u.trunk.backward(wsU, dYu, nullptr, &dXu);

  Row dBeta(B);
  const int encDim = u.space.enc_dim;
  for (Index i = 0; i < B; ++i) {
    const Vec eg = numkit::encodeBalanceGrad(betaRow(i), u.space);
    dBeta(i) = eg.dot(dXu.col(i).tail(encDim));
  }

  const Row dTau = (dBeta.array() * (span * 0.5)).matrix();
  const Row dx = (dTau.array() * (1.0 - tau.array().square())).matrix();
  dLatent->resize(2, B);
  dLatent->row(0) = dx;
  dLatent->row(1) =
      (dx.array() * latentStd.array() * noiseBeta.array() * maskB.array())
          .matrix();
  return obj;
}

}  // namespace

double balanceObjective(const BalanceModel& b, const UniversalModel& u,
                        const algos::QNetwork& q, const Mat& obs,
                        const Row& noiseBeta, const Mat& noiseAct) {
  Mlp::Workspace wsB;
  return balanceCore(b, u, q, obs, noiseBeta, noiseAct, wsB, nullptr);
}

double balanceUpdate(BalanceModel& b, numkit::Adam& opt, const UniversalModel& u,
                     const algos::QNetwork& q, const Mat& obs,
                     const Row& noiseBeta, const Mat& noiseAct) {
  Mlp::Workspace wsB;
  Mat dLatent;
  const double obj = balanceCore(b, u, q, obs, noiseBeta, noiseAct, wsB, &dLatent);
  Mlp::Gradients grads = b.trunk.zeroGradients();
  b.trunk.backward(wsB, -dLatent, &grads);
  opt.step(b.trunk, grads);
  return obj;
}

double balanceObjectiveWithGrad(const BalanceModel& b, const UniversalModel& u,
                                const algos::QNetwork& q, const Mat& obs,
                                const Row& noiseBeta, const Mat& noiseAct,
                                Mlp::Gradients* grad) {
  Mlp::Workspace wsB;
  Mat dLatent;
  const double obj = balanceCore(b, u, q, obs, noiseBeta, noiseAct, wsB, &dLatent);
  *grad = b.trunk.zeroGradients();
  b.trunk.backward(wsB, dLatent, grad);
  return obj;
}

namespace {

double conservativeCore(const UniversalModel& u, const algos::QNetwork& q,
                        const Mat& obs, const Row& alpha, const Mat& noiseAct,
                        Mlp::Workspace& wsU, Mat* dY) {
  checkBatchSizes(obs, alpha);
  const Index B = obs.cols();
  const double invB = 1.0 / static_cast<double>(B);
  const Mat X = u.inputBatch(obs, alpha);
  const Mat& out = u.trunk.forward(X, wsU);

  if (u.head == UniversalModel::Head::kSoftmax) {
    // Exact expectation: sum_a p_a (alpha * Q(s, a) - log p_a).
    const Mat P = numkit::softmax::probsFromLogits(out);
    const Row lse = numkit::softmax::logSumExp(out);
    const Mat Qall = q.allValues(obs);
    if (dY != nullptr) dY->resize(out.rows(), B);
    double obj = 0.0;
    for (Index i = 0; i < B; ++i) {
      const Vec logP = out.col(i) - Vec::Constant(out.rows(), lse(i));
      const Vec c = alpha(i) * Qall.col(i) - logP;
      const double ev = P.col(i).dot(c);
      obj += ev * invB;
      if (dY != nullptr)
        dY->col(i) =
            invB * P.col(i).cwiseProduct(c - Vec::Constant(c.size(), ev));
    }
    return obj;
  }

  const GaussianBatch g = splitGaussian(out);
  const SquashedAction s = reparamAction(u, g, noiseAct);
  const Index d = g.mean.rows();
  Mat qin(obs.rows() + d, B);
  qin.topRows(obs.rows()) = obs;
  qin.bottomRows(d) = s.act;
  Mlp::Workspace wsQ;
  const Mat& qv = q.net.forward(qin, wsQ);

  // log pi at the reparameterized sample: the normal part collapses to
  // -0.5*eps^2 - logStd - log(2*pi)/2, the tanh correction keeps its
  // dependence on the pre-squash sample.
  Row logPi(B);
  for (Index i = 0; i < B; ++i) {
    double lp = 0.0;
    for (Index k = 0; k < d; ++k) {
      lp -= 0.5 * noiseAct(k, i) * noiseAct(k, i) + g.logStd(k, i) +
            numkit::gaussian::kHalfLog2Pi;
      lp -= std::log(s.w1(k, i) + kTanhEps);
    }
    logPi(i) = lp;
  }
  double obj = 0.0;
  for (Index i = 0; i < B; ++i)
    obj += (alpha(i) * qv(0, i) - logPi(i)) * invB;

  if (dY != nullptr) {
    Mat dQout(1, B);
    for (Index i = 0; i < B; ++i) dQout(0, i) = alpha(i) * invB;
    Mat dQin;
    q.net.backward(wsQ, dQout, nullptr, &dQin);
    const Mat dAct = dQin.bottomRows(d);
    // d(-log pi)/d(pre-squash) has only the tanh-correction part; the normal
    // part is constant in the reparameterized view.
    const Mat gCorr =
        (2.0 * s.tanh.array() * s.w1.array() / (s.w1.array() + kTanhEps))
            .matrix();
    const Mat base = dAct.cwiseProduct(s.w1) - invB * gCorr;
    dY->resize(2 * d, B);
    dY->topRows(d) = base;
    dY->bottomRows(d) =
        (base.cwiseProduct(g.std.cwiseProduct(noiseAct)).array() + invB)
            .matrix()
            .cwiseProduct(g.mask);
  }
  return obj;
}

}  // namespace

double conservativePolicyObjective(const UniversalModel& u,
                                   const algos::QNetwork& q, const Mat& obs,
                                   const Row& alpha, const Mat& noiseAct) {
  Mlp::Workspace ws;
  return conservativeCore(u, q, obs, alpha, noiseAct, ws, nullptr);
}

double conservativePolicyUpdate(UniversalModel& u, numkit::Adam& opt,
                                const algos::QNetwork& q, const Mat& obs,
                                const Row& alpha, const Mat& noiseAct) {
  Mlp::Workspace ws;
  Mat dY;
  const double obj = conservativeCore(u, q, obs, alpha, noiseAct, ws, &dY);
  Mlp::Gradients grads = u.trunk.zeroGradients();
  u.trunk.backward(ws, -dY, &grads);
  opt.step(u.trunk, grads);
  return obj;
}

double conservativePolicyObjectiveWithGrad(const UniversalModel& u,
                                           const algos::QNetwork& q,
                                           const Mat& obs, const Row& alpha,
                                           const Mat& noiseAct,
                                           Mlp::Gradients* grad) {
  Mlp::Workspace ws;
  Mat dY;
  const double obj = conservativeCore(u, q, obs, alpha, noiseAct, ws, &dY);
  *grad = u.trunk.zeroGradients();
  u.trunk.backward(ws, dY, grad);
  return obj;
}

}  // namespace core
}  // namespace famo2o
