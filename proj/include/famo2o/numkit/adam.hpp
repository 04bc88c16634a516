#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "famo2o/numkit/mlp.hpp"
#include "famo2o/numkit/types.hpp"

namespace famo2o {
namespace numkit {

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction, one state per optimized network. step()
/// descends along the given gradients; callers maximizing an objective hand
/// in the gradient of its negation.
template <typename Scalar>
class AdamT {
 public:
  using MatT = MatX<Scalar>;
  using VecT = VecX<Scalar>;

  AdamT() = default;

  AdamT(const MlpT<Scalar>& net, AdamConfig cfg) : cfg_(cfg) {
    mW_.reserve(net.layerCount());
    for (std::size_t l = 0; l < net.layerCount(); ++l) {
      mW_.push_back(MatT::Zero(net.weight(l).rows(), net.weight(l).cols()));
      vW_.push_back(MatT::Zero(net.weight(l).rows(), net.weight(l).cols()));
      mb_.push_back(VecT::Zero(net.bias(l).size()));
      vb_.push_back(VecT::Zero(net.bias(l).size()));
    }
  }

  const AdamConfig& config() const { return cfg_; }
  long stepCount() const { return t_; }

  void step(MlpT<Scalar>& net, const typename MlpT<Scalar>::Gradients& g) {
    if (g.dW.size() != mW_.size()) {
      throw std::invalid_argument("AdamT::step: gradient/net layer mismatch");
    }
    for (const auto& m : g.dW) {
      if (!m.allFinite()) {
        throw std::invalid_argument("AdamT::step: non-finite weight gradient");
      }
    }
    for (const auto& v : g.db) {
      if (!v.allFinite()) {
        throw std::invalid_argument("AdamT::step: non-finite bias gradient");
      }
    }
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t l = 0; l < mW_.size(); ++l) {
      update(net.weight(l), g.dW[l], mW_[l], vW_[l], c1, c2);
      update(net.bias(l), g.db[l], mb_[l], vb_[l], c1, c2);
    }
  }

 private:
  template <typename P, typename G>
  void update(P& param, const G& grad, P& m, P& v, double c1, double c2) {
    m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * grad;
    v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * grad.cwiseProduct(grad);
    param.array() -=
        cfg_.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg_.eps);
  }

  AdamConfig cfg_;
  std::vector<MatT> mW_, vW_;
  std::vector<VecT> mb_, vb_;
  long t_ = 0;
};

using Adam = AdamT<double>;

}  // namespace numkit
}  // namespace famo2o
