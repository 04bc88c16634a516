#include "famo2o/algos/values.hpp"

#include <cmath>
#include <stdexcept>

#include "famo2o/numkit/heads.hpp"

namespace famo2o {
namespace algos {

using numkit::Index;
using numkit::Mat;
using numkit::Mlp;
using numkit::Row;

QNetwork QNetwork::discrete(int obs_dim, const std::vector<Index>& hidden,
                            int n_actions, numkit::Rng& rng) {
  if (n_actions < 1) throw std::invalid_argument("discrete QNetwork needs n_actions >= 1");
  std::vector<Index> dims;
  dims.push_back(obs_dim);
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(n_actions);
  QNetwork q;
  q.net = Mlp(dims, rng);
  q.kind = Kind::kDiscrete;
  q.n_actions = n_actions;
  return q;
}

QNetwork QNetwork::box(int obs_dim, const std::vector<Index>& hidden, int act_dim,
                       numkit::Rng& rng) {
  if (act_dim < 1) throw std::invalid_argument("box QNetwork needs act_dim >= 1");
  std::vector<Index> dims;
  dims.push_back(obs_dim + act_dim);
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(1);
  QNetwork q;
  q.net = Mlp(dims, rng);
  q.kind = Kind::kBox;
  q.act_dim = act_dim;
  return q;
}

Mat QNetwork::allValues(const Mat& obs) const {
  if (kind != Kind::kDiscrete)
    throw std::runtime_error("allValues is only defined for discrete QNetwork");
  numkit::Mlp::Workspace ws;
  return net.forward(obs, ws);
}

Row QNetwork::dataValues(const Mat& obs, const Mat& actRaw) const {
  numkit::Mlp::Workspace ws;
  if (kind == Kind::kDiscrete) {
    const Mat all = net.forward(obs, ws);
    Row out(obs.cols());
    for (Index i = 0; i < obs.cols(); ++i) {
      const auto a = static_cast<Index>(actRaw(0, i));
      if (a < 0 || a >= all.rows())
        throw std::out_of_range("action index out of range in dataValues");
      out(i) = all(a, i);
    }
    return out;
  }
  Mat input(obs.rows() + actRaw.rows(), obs.cols());
  input.topRows(obs.rows()) = obs;
  input.bottomRows(actRaw.rows()) = actRaw;
  return net.forward(input, ws).row(0);
}

VNetwork VNetwork::make(int obs_dim, const std::vector<Index>& hidden,
                        numkit::Rng& rng) {
  std::vector<Index> dims;
  dims.push_back(obs_dim);
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(1);
  VNetwork v;
  v.net = Mlp(dims, rng);
  return v;
}

Row VNetwork::values(const Mat& obs) const {
  numkit::Mlp::Workspace ws;
  return net.forward(obs, ws).row(0);
}

namespace {

// Shared forward pass + residual math for the expectile loss.  Fills dOut
// with the descent gradient w.r.t. the network output when grads != nullptr.
double expectileCore(const VNetwork& v, const Mat& obs, const Row& qData,
                     double tau, numkit::Mlp::Workspace& ws, Mat* dOut) {
  if (qData.size() != obs.cols())
    throw std::invalid_argument("expectile loss: qData/batch size mismatch");
  if (tau <= 0.0 || tau >= 1.0)
    throw std::invalid_argument("expectile loss: tau must lie in (0, 1)");
  const Mat pred = v.net.forward(obs, ws);
  const double invB = 1.0 / static_cast<double>(obs.cols());
  double loss = 0.0;
  if (dOut != nullptr) dOut->resize(1, obs.cols());
  for (Index i = 0; i < obs.cols(); ++i) {
    const double u = qData(i) - pred(0, i);
    const double w = (u < 0.0) ? (1.0 - tau) : tau;
    loss += w * u * u * invB;
    // d/dpred of w*(qData - pred)^2 / B
    if (dOut != nullptr) (*dOut)(0, i) = -2.0 * w * u * invB;
  }
  return loss;
}

double tdCore(const QNetwork& q, const Mat& obs, const Mat& actRaw,
              const Row& targets, numkit::Mlp::Workspace& ws, Mat* input,
              Mat* dOut) {
  if (targets.size() != obs.cols())
    throw std::invalid_argument("td loss: target/batch size mismatch");
  const Index B = obs.cols();
  const double invB = 1.0 / static_cast<double>(B);
  Mat pred;
  if (q.kind == QNetwork::Kind::kDiscrete) {
    *input = obs;
  } else {
    input->resize(obs.rows() + actRaw.rows(), B);
    input->topRows(obs.rows()) = obs;
    input->bottomRows(actRaw.rows()) = actRaw;
  }
  pred = q.net.forward(*input, ws);
  if (dOut != nullptr) *dOut = Mat::Zero(pred.rows(), pred.cols());
  double loss = 0.0;
  for (Index i = 0; i < B; ++i) {
    Index row = 0;
    if (q.kind == QNetwork::Kind::kDiscrete) {
      row = static_cast<Index>(actRaw(0, i));
      if (row < 0 || row >= pred.rows())
        throw std::out_of_range("action index out of range in td loss");
    }
    const double diff = pred(row, i) - targets(i);
    loss += diff * diff * invB;
    if (dOut != nullptr) (*dOut)(row, i) += 2.0 * diff * invB;
  }
  return loss;
}

}  // namespace

double expectileLoss(const VNetwork& v, const Mat& obs, const Row& qData,
                     double tau) {
  numkit::Mlp::Workspace ws;
  return expectileCore(v, obs, qData, tau, ws, nullptr);
}

double expectileUpdate(VNetwork& v, numkit::Adam& opt, const Mat& obs,
                       const Row& qData, double tau) {
  numkit::Mlp::Workspace ws;
  Mat dOut;
  const double loss = expectileCore(v, obs, qData, tau, ws, &dOut);
  numkit::Mlp::Gradients grads = v.net.zeroGradients();
  v.net.backward(ws, dOut, &grads);
  opt.step(v.net, grads);
  return loss;
}

double expectileLossWithGrad(const VNetwork& v, const Mat& obs, const Row& qData,
                             double tau, numkit::Mlp::Gradients* grad) {
  numkit::Mlp::Workspace ws;
  Mat dOut;
  const double loss = expectileCore(v, obs, qData, tau, ws, &dOut);
  *grad = v.net.zeroGradients();
  v.net.backward(ws, dOut, grad);
  return loss;
}

double tdLoss(const QNetwork& q, const Mat& obs, const Mat& actRaw,
              const Row& targets) {
  numkit::Mlp::Workspace ws;
  Mat input;
  return tdCore(q, obs, actRaw, targets, ws, &input, nullptr);
}

double tdUpdate(QNetwork& q, numkit::Adam& opt, const Mat& obs, const Mat& actRaw,
                const Row& targets) {
  numkit::Mlp::Workspace ws;
  Mat input;
  Mat dOut;
  const double loss = tdCore(q, obs, actRaw, targets, ws, &input, &dOut);
  numkit::Mlp::Gradients grads = q.net.zeroGradients();
  q.net.backward(ws, dOut, &grads);
  opt.step(q.net, grads);
  return loss;
}

double tdLossWithGrad(const QNetwork& q, const Mat& obs, const Mat& actRaw,
                      const Row& targets, numkit::Mlp::Gradients* grad) {
  numkit::Mlp::Workspace ws;
  Mat input;
  Mat dOut;
  const double loss = tdCore(q, obs, actRaw, targets, ws, &input, &dOut);
  *grad = q.net.zeroGradients();
  q.net.backward(ws, dOut, grad);
  return loss;
}

namespace {

// TD core plus conservative penalty.  Gradients from the penalty's sampled /
// enumerated branch are accumulated into `grads` directly (extra forward
// passes use their own workspaces), while the TD + data-action part is
// returned through dOut for the caller's shared backward pass.
double cqlCore(const QNetwork& q, const Mat& obs, const Mat& actRaw,
               const Row& targets, const Mat& sampled, double alphaCql,
               numkit::Mlp::Workspace& ws, Mat* input, Mat* dOut,
               numkit::Mlp::Gradients* grads) {
  if (alphaCql < 0.0)
    throw std::invalid_argument("cql loss: alphaCql must be non-negative");
  double loss = tdCore(q, obs, actRaw, targets, ws, input, dOut);
  if (alphaCql == 0.0) return loss;

  const Index B = obs.cols();
  const double invB = 1.0 / static_cast<double>(B);

  if (q.kind == QNetwork::Kind::kDiscrete) {
    // Exact enumeration: the forward pass in `ws` already holds all action
    // values, so the penalty reuses it.
    const Mat& all = ws.act.back();
    for (Index i = 0; i < B; ++i) {
      const numkit::Vec probs = numkit::softmax::probsFromLogits(all.col(i));
      const double lse = numkit::softmax::logSumExp(all.col(i))(0);
      const auto a = static_cast<Index>(actRaw(0, i));
      loss += alphaCql * (lse - all(a, i)) * invB;
      if (dOut != nullptr) {
        dOut->col(i) += alphaCql * invB * probs;
        (*dOut)(a, i) -= alphaCql * invB;
      }
    }
    return loss;
  }

  // Box actions: logsumexp over M sampled actions per batch column.
  if (sampled.cols() % B != 0 || sampled.cols() == 0)
    throw std::invalid_argument("cql loss: sampled action count must be a positive multiple of the batch size");
  const Index M = sampled.cols() / B;
  Mat stacked(obs.rows() + sampled.rows(), sampled.cols());
  for (Index i = 0; i < B; ++i)
    stacked.block(0, i * M, obs.rows(), M).colwise() = obs.col(i);
  stacked.bottomRows(sampled.rows()) = sampled;
  numkit::Mlp::Workspace wsPen;
  const Mat qs = q.net.forward(stacked, wsPen);

  // Data-action term of the penalty rides on the TD pass output gradient.
  const Row qData = ws.act.back().row(0);
  Mat dPen = Mat::Zero(1, sampled.cols());
  for (Index i = 0; i < B; ++i) {
    const numkit::Vec group = qs.row(0).segment(i * M, M).transpose();
    const double lse = numkit::softmax::logSumExp(group)(0);
    loss += alphaCql * (lse - qData(i)) * invB;
    if (dOut != nullptr) {
      const numkit::Vec soft = numkit::softmax::probsFromLogits(group);
      dPen.row(0).segment(i * M, M) = alphaCql * invB * soft.transpose();
      (*dOut)(0, i) -= alphaCql * invB;
    }
  }
  if (grads != nullptr) q.net.backward(wsPen, dPen, grads);
  return loss;
}

}  // namespace

double cqlQLoss(const QNetwork& q, const Mat& obs, const Mat& actRaw,
                const Row& targets, const Mat& sampled, double alphaCql) {
  numkit::Mlp::Workspace ws;
  Mat input;
  return cqlCore(q, obs, actRaw, targets, sampled, alphaCql, ws, &input, nullptr,
                 nullptr);
}

double cqlQUpdate(QNetwork& q, numkit::Adam& opt, const Mat& obs,
                  const Mat& actRaw, const Row& targets, const Mat& sampled,
                  double alphaCql) {
  numkit::Mlp::Workspace ws;
  Mat input;
  Mat dOut;
  numkit::Mlp::Gradients grads = q.net.zeroGradients();
  const double loss =
      cqlCore(q, obs, actRaw, targets, sampled, alphaCql, ws, &input, &dOut, &grads);
  q.net.backward(ws, dOut, &grads);
  opt.step(q.net, grads);
  return loss;
}

double cqlQLossWithGrad(const QNetwork& q, const Mat& obs, const Mat& actRaw,
                        const Row& targets, const Mat& sampled, double alphaCql,
                        numkit::Mlp::Gradients* grad) {
  numkit::Mlp::Workspace ws;
  Mat input;
  Mat dOut;
  *grad = q.net.zeroGradients();
  const double loss =
      cqlCore(q, obs, actRaw, targets, sampled, alphaCql, ws, &input, &dOut, grad);
  q.net.backward(ws, dOut, grad);
  return loss;
}

void softUpdate(Mlp& target, const Mlp& online, double rho) {
  if (rho < 0.0 || rho > 1.0)
    throw std::invalid_argument("softUpdate: rho must lie in [0, 1]");
  if (target.layerCount() != online.layerCount())
    throw std::invalid_argument("softUpdate: mismatched network shapes");
  for (std::size_t l = 0; l < target.layerCount(); ++l) {
    target.weight(l) = (1.0 - rho) * target.weight(l) + rho * online.weight(l);
    target.bias(l) = (1.0 - rho) * target.bias(l) + rho * online.bias(l);
  }
}

}  // namespace algos
}  // namespace famo2o
