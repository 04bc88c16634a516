#include "famo2o/core/models.hpp"

#include <cmath>
#include <stdexcept>

namespace famo2o {
namespace core {

using numkit::ClampCounter;
using numkit::Index;
using numkit::Mat;
using numkit::Mlp;
using numkit::Row;
using numkit::Vec;

UniversalModel UniversalModel::discrete(int obs_dim,
                                        const std::vector<Index>& hidden,
                                        int n_actions,
                                        const numkit::BalanceSpace& space,
                                        numkit::Rng& rng) {
  if (n_actions < 1)
    throw std::invalid_argument("UniversalModel: need at least one action");
  space.validate();
  UniversalModel u;
  std::vector<Index> dims;
  dims.push_back(obs_dim + space.enc_dim);
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(n_actions);
  u.trunk = Mlp(dims, rng);
  u.head = Head::kSoftmax;
  u.space = space;
  u.obs_dim = obs_dim;
  u.n_actions = n_actions;
  return u;
}

UniversalModel UniversalModel::box(int obs_dim, const std::vector<Index>& hidden,
                                   const Vec& center, const Vec& half,
                                   const numkit::BalanceSpace& space,
                                   numkit::Rng& rng) {
  if (center.size() != half.size() || center.size() == 0)
    throw std::invalid_argument("UniversalModel: bad box geometry");
  if ((half.array() <= 0.0).any())
    throw std::invalid_argument("UniversalModel: box half-widths must be positive");
  space.validate();
  UniversalModel u;
  std::vector<Index> dims;
  dims.push_back(obs_dim + space.enc_dim);
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(2 * center.size());
  u.trunk = Mlp(dims, rng);
  u.head = Head::kSquashedGaussian;
  u.space = space;
  u.obs_dim = obs_dim;
  u.action_center = center;
  u.action_half = half;
  return u;
}

Vec UniversalModel::input(const Vec& obs, double beta, ClampCounter* counter) const {
  if (obs.size() != obs_dim)
    throw std::invalid_argument("UniversalModel: observation dim mismatch");
  Vec x(obs_dim + space.enc_dim);
  x.head(obs_dim) = obs;
  numkit::encodeBalanceInto(beta, space, x.tail(space.enc_dim), counter);
  return x;
}

Mat UniversalModel::inputBatch(const Mat& obs, const Row& beta,
                               ClampCounter* counter) const {
  if (obs.rows() != obs_dim)
    throw std::invalid_argument("UniversalModel: observation dim mismatch");
  if (beta.size() != obs.cols())
    throw std::invalid_argument("UniversalModel: beta/batch size mismatch");
  Mat x(obs_dim + space.enc_dim, obs.cols());
  x.topRows(obs_dim) = obs;
  for (Index i = 0; i < obs.cols(); ++i) {
    numkit::encodeBalanceInto(beta(i), space, x.col(i).tail(space.enc_dim),
                              counter);
  }
  return x;
}

numkit::SoftmaxHead UniversalModel::softmaxAt(const Vec& obs, double beta) const {
  if (head != Head::kSoftmax)
    throw std::runtime_error("UniversalModel: not a softmax policy");
  return numkit::SoftmaxHead{trunk.forward(input(obs, beta))};
}

numkit::GaussianHead UniversalModel::gaussianAt(const Vec& obs, double beta) const {
  if (head != Head::kSquashedGaussian)
    throw std::runtime_error("UniversalModel: not a squashed-Gaussian policy");
  return numkit::GaussianHead::fromOutput(trunk.forward(input(obs, beta)));
}

Vec UniversalModel::sampleAction(const Vec& obs, double beta,
                                 numkit::Rng& rng) const {
  if (head == Head::kSoftmax) {
    Vec a(1);
    a(0) = static_cast<double>(softmaxAt(obs, beta).sample(rng));
    return a;
  }
  return gaussianAt(obs, beta).sampleSquashed(action_center, action_half, rng);
}

Vec UniversalModel::modeAction(const Vec& obs, double beta) const {
  if (head == Head::kSoftmax) {
    Vec a(1);
    a(0) = static_cast<double>(softmaxAt(obs, beta).argmax());
    return a;
  }
  const numkit::GaussianHead h = gaussianAt(obs, beta);
  return action_center +
         action_half.cwiseProduct(h.mean.array().tanh().matrix());
}

double UniversalModel::logProb(const Vec& obs, double beta,
                               const Vec& actionRaw) const {
  if (head == Head::kSoftmax) {
    return softmaxAt(obs, beta).logProb(static_cast<Index>(actionRaw(0)));
  }
  return gaussianAt(obs, beta).logProbSquashed(action_center, action_half,
                                               actionRaw);
}

BalanceModel BalanceModel::make(int obs_dim, const std::vector<Index>& hidden,
                                const numkit::BalanceSpace& space,
                                numkit::Rng& rng) {
  space.validate();
  BalanceModel b;
  std::vector<Index> dims;
  dims.push_back(obs_dim);
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(2);
  b.trunk = Mlp(dims, rng);
  // Start conservative: the latent-mean bias puts early coefficients near the
  // low end of the space, so states only become radical where the critic
  // actually rewards it. The log-std bias keeps early samples away from the
  // tanh saturation zone.
  b.trunk.bias(b.trunk.layerCount() - 1)(0) = -1.0;
  b.trunk.bias(b.trunk.layerCount() - 1)(1) = -1.0;
  b.space = space;
  return b;
}

double BalanceModel::sampleBeta(const Vec& obs, numkit::Rng& rng) const {
  const Vec out = trunk.forward(obs);
  const double logStd = std::min(numkit::gaussian::kLogStdMax,
                                 std::max(numkit::gaussian::kLogStdMin, out(1)));
  const double x = out(0) + std::exp(logStd) * rng.normal();
  return betaFromLatent(x);
}

double BalanceModel::meanBeta(const Vec& obs) const {
  return betaFromLatent(trunk.forward(obs)(0));
}

ActResult act(const UniversalModel& u, const BalanceModel& b, const Vec& obs,
              bool deterministic, numkit::Rng* rng) {
  if (!deterministic && rng == nullptr)
    throw std::invalid_argument("act: stochastic mode needs an Rng");
  ActResult r;
  if (deterministic) {
    r.beta = b.meanBeta(obs);
    r.action = u.modeAction(obs, r.beta);
  } else {
    r.beta = b.sampleBeta(obs, *rng);
    r.action = u.sampleAction(obs, r.beta, *rng);
  }
  return r;
}

}  // namespace core
}  // namespace famo2o
