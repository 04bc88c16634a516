#pragma once

#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "famo2o/numkit/rng.hpp"
#include "famo2o/numkit/types.hpp"

namespace famo2o {
namespace numkit {

/// Fully connected network with ReLU hidden activations and an identity
/// output layer. Gradients are computed by hand (reverse accumulation); the
/// batch dimension is the column dimension so forward/backward reduce to
/// dense matrix products.
template <typename Scalar>
class MlpT {
 public:
  using MatT = MatX<Scalar>;
  using VecT = VecX<Scalar>;

  /// Per-layer parameter gradients, shaped like the parameters themselves.
  struct Gradients {
    std::vector<MatT> dW;
    std::vector<VecT> db;

    void setZero() {
      for (auto& m : dW) m.setZero();
      for (auto& v : db) v.setZero();
    }
  };

  /// Forward-pass cache reused across steps to avoid reallocation.
  struct Workspace {
    std::vector<MatT> act;  // act[0] = input, act[l+1] = output of layer l
    std::vector<MatT> pre;  // pre[l] = W_l * act[l] + b_l
  };

  MlpT() = default;

  /// dims = [input, hidden..., output]; at least one layer. Weights start
  /// uniform on +-1/sqrt(fan_in), biases at zero.
  MlpT(std::vector<Index> dims, Rng& rng) : dims_(std::move(dims)) {
    if (dims_.size() < 2) {
      throw std::invalid_argument("MlpT: need at least input and output dims");
    }
    for (Index d : dims_) {
      if (d <= 0) throw std::invalid_argument("MlpT: non-positive layer dim");
    }
    const std::size_t L = dims_.size() - 1;
    weights_.resize(L);
    biases_.resize(L);
    for (std::size_t l = 0; l < L; ++l) {
      const Index out = dims_[l + 1], in = dims_[l];
      weights_[l].resize(out, in);
      const double bound = 1.0 / std::sqrt(static_cast<double>(in));
      for (Index j = 0; j < in; ++j) {
        for (Index i = 0; i < out; ++i) {
          weights_[l](i, j) = static_cast<Scalar>(rng.uniform(-bound, bound));
        }
      }
      biases_[l] = VecT::Zero(out);
    }
  }

  const std::vector<Index>& dims() const { return dims_; }
  Index inputDim() const { return dims_.front(); }
  Index outputDim() const { return dims_.back(); }
  std::size_t layerCount() const { return weights_.size(); }

  MatT& weight(std::size_t l) { return weights_.at(l); }
  const MatT& weight(std::size_t l) const { return weights_.at(l); }
  VecT& bias(std::size_t l) { return biases_.at(l); }
  const VecT& bias(std::size_t l) const { return biases_.at(l); }

  /// Batched forward pass; X is input_dim x batch, result output_dim x batch.
  /// The workspace keeps every activation for a later backward().
  const MatT& forward(const MatT& X, Workspace& ws) const {
    checkInput(X.rows());
    const std::size_t L = weights_.size();
    ws.act.resize(L + 1);
    ws.pre.resize(L);
    ws.act[0] = X;
    for (std::size_t l = 0; l < L; ++l) {
      ws.pre[l].noalias() = weights_[l] * ws.act[l];
      ws.pre[l].colwise() += biases_[l];
      if (l + 1 < L) {
        ws.act[l + 1] = ws.pre[l].cwiseMax(Scalar(0));
      } else {
        ws.act[l + 1] = ws.pre[l];
      }
    }
    return ws.act[L];
  }

  MatT forward(const MatT& X) const {
    Workspace ws;
    return forward(X, ws);
  }

  VecT forward(const VecT& x) const {
    Workspace ws;
    return forward(MatT(x), ws).col(0);
  }

  /// Reverse pass from dY = dLoss/dOutput (output_dim x batch). Parameter
  /// gradients accumulate into *grads when given (shapes must match; use
  /// zeroGradients()); input gradients land in *dX when given. Passing only
  /// dX skips the parameter-gradient products, which is what frozen-network
  /// chains (e.g. a critic inside a policy objective) want.
  void backward(const Workspace& ws, const MatT& dY, Gradients* grads,
                MatT* dX = nullptr) const {
    const std::size_t L = weights_.size();
    if (ws.act.size() != L + 1) {
      throw std::invalid_argument("MlpT::backward: workspace not from forward");
    }
    if (dY.rows() != dims_.back() || dY.cols() != ws.act[0].cols()) {
      throw std::invalid_argument("MlpT::backward: dY shape mismatch");
    }
    MatT delta = dY;
    for (std::size_t l = L; l-- > 0;) {
      if (grads != nullptr) {
        grads->dW[l].noalias() += delta * ws.act[l].transpose();
        grads->db[l].noalias() += delta.rowwise().sum();
      }
      if (l > 0) {
        MatT next;
        next.noalias() = weights_[l].transpose() * delta;
        delta = next.cwiseProduct(
            (ws.pre[l - 1].array() > Scalar(0)).template cast<Scalar>().matrix());
      } else if (dX != nullptr) {
        dX->noalias() = weights_[0].transpose() * delta;
      }
    }
  }

  Gradients zeroGradients() const {
    Gradients g;
    g.dW.reserve(weights_.size());
    g.db.reserve(biases_.size());
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      g.dW.push_back(MatT::Zero(weights_[l].rows(), weights_[l].cols()));
      g.db.push_back(VecT::Zero(biases_[l].size()));
    }
    return g;
  }

  Index parameterCount() const {
    Index n = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      n += weights_[l].size() + biases_[l].size();
    }
    return n;
  }

  /// Gradients flattened in the same order as flatten(), so analytic
  /// gradients line up with finite differences over setFlat() perturbations.
  static VecT flattenGradients(const Gradients& g) {
    Index n = 0;
    for (std::size_t l = 0; l < g.dW.size(); ++l) {
      n += g.dW[l].size() + g.db[l].size();
    }
    VecT out(n);
    Index k = 0;
    for (std::size_t l = 0; l < g.dW.size(); ++l) {
      out.segment(k, g.dW[l].size()) =
          Eigen::Map<const VecT>(g.dW[l].data(), g.dW[l].size());
      k += g.dW[l].size();
      out.segment(k, g.db[l].size()) = g.db[l];
      k += g.db[l].size();
    }
    return out;
  }

  /// Flat parameter view, per layer weight coefficients (storage order) then
  /// bias. Round-trips exactly through setFlat().
  VecT flatten() const {
    VecT out(parameterCount());
    Index k = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      out.segment(k, weights_[l].size()) =
          Eigen::Map<const VecT>(weights_[l].data(), weights_[l].size());
      k += weights_[l].size();
      out.segment(k, biases_[l].size()) = biases_[l];
      k += biases_[l].size();
    }
    return out;
  }

  void setFlat(const VecT& theta) {
    if (theta.size() != parameterCount()) {
      throw std::invalid_argument("MlpT::setFlat: size mismatch");
    }
    Index k = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      Eigen::Map<VecT>(weights_[l].data(), weights_[l].size()) =
          theta.segment(k, weights_[l].size());
      k += weights_[l].size();
      biases_[l] = theta.segment(k, biases_[l].size());
      k += biases_[l].size();
    }
  }

 private:
  void checkInput(Index rows) const {
    if (rows != dims_.front()) {
      std::ostringstream msg;
      msg << "MlpT::forward: input has " << rows << " rows, expected "
          << dims_.front();
      throw std::invalid_argument(msg.str());
    }
  }

  std::vector<Index> dims_;
  std::vector<MatT> weights_;
  std::vector<VecT> biases_;
};

using Mlp = MlpT<double>;

}  // namespace numkit
}  // namespace famo2o
