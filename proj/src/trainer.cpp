#include "famo2o/core/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "famo2o/numkit/checkpoint.hpp"
#include "famo2o/util/format.hpp"

namespace famo2o {
namespace core {

using numkit::Index;
using numkit::Mat;
using numkit::Row;
using numkit::Rng;
using numkit::Vec;

namespace {

// Stream tags for the per-purpose generators derived from the master seed.
constexpr std::uint64_t kStreamUniversal = 1;
constexpr std::uint64_t kStreamBalance = 2;
constexpr std::uint64_t kStreamQ = 3;
constexpr std::uint64_t kStreamV = 4;
constexpr std::uint64_t kStreamSampler = 5;
constexpr std::uint64_t kStreamBeta = 6;
constexpr std::uint64_t kStreamBalanceNoise = 7;
constexpr std::uint64_t kStreamEnv = 8;
constexpr std::uint64_t kStreamEval = 9;
constexpr std::uint64_t kStreamWeights = 10;

UniversalModel makeUniversal(const envs::EnvModel& env, const TrainConfig& cfg,
                             Rng& rng) {
  const envs::ActionSpace& as = env.actions();
  if (as.kind == envs::ActionKind::kDiscrete) {
    return UniversalModel::discrete(env.obsDim(), cfg.hidden, as.n, cfg.space, rng);
  }
  return UniversalModel::box(env.obsDim(), cfg.hidden, as.center, as.half,
                             cfg.space, rng);
}

algos::QNetwork makeQ(const envs::EnvModel& env, const TrainConfig& cfg, Rng& rng) {
  const envs::ActionSpace& as = env.actions();
  if (as.kind == envs::ActionKind::kDiscrete) {
    return algos::QNetwork::discrete(env.obsDim(), cfg.hidden, as.n, rng);
  }
  return algos::QNetwork::box(env.obsDim(), cfg.hidden, int(as.center.size()), rng);
}

}  // namespace

void TrainConfig::validate() const {
  space.validate();
  if (lr <= 0.0) throw std::invalid_argument("TrainConfig: lr must be > 0");
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("TrainConfig: gamma must lie in (0, 1)");
  if (expectile_tau <= 0.0 || expectile_tau >= 1.0)
    throw std::invalid_argument("TrainConfig: expectile_tau must lie in (0, 1)");
  if (target_rho < 0.0 || target_rho > 1.0)
    throw std::invalid_argument("TrainConfig: target_rho must lie in [0, 1]");
  if (weight_cap <= 0.0)
    throw std::invalid_argument("TrainConfig: weight_cap must be > 0");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size < 1");
  if (offline_steps < 0 || online_steps < 0)
    throw std::invalid_argument("TrainConfig: negative step counts");
  if (balance_update_freq < 1)
    throw std::invalid_argument("TrainConfig: balance_update_freq < 1");
  if (policy_samples < 1)
    throw std::invalid_argument("TrainConfig: policy_samples < 1");
  if (cql_uniform_samples < 0 || cql_policy_samples < 0 ||
      cql_uniform_samples + cql_policy_samples < 1)
    throw std::invalid_argument("TrainConfig: conservative penalty needs samples");
  if (alpha_cql < 0.0)
    throw std::invalid_argument("TrainConfig: alpha_cql must be >= 0");
  if (log_every < 1) throw std::invalid_argument("TrainConfig: log_every < 1");
  if (selector == Selector::kFixed &&
      (fixed_beta < space.beta_min || fixed_beta > space.beta_max))
    throw std::invalid_argument(
        "TrainConfig: fixed_beta outside the coefficient space");
}

Trainer::Trainer(const envs::EnvModel& env, TrainConfig cfg)
    : env_(env),
      cfg_(std::move(cfg)),
      buffer_(cfg_.buffer_capacity),
      rngSampler_(Rng::deriveSeed(cfg_.seed, kStreamSampler)),
      rngBeta_(Rng::deriveSeed(cfg_.seed, kStreamBeta)),
      rngBalance_(Rng::deriveSeed(cfg_.seed, kStreamBalanceNoise)),
      rngEnv_(Rng::deriveSeed(cfg_.seed, kStreamEnv)),
      rngEval_(Rng::deriveSeed(cfg_.seed, kStreamEval)),
      rngWeights_(Rng::deriveSeed(cfg_.seed, kStreamWeights)),
      driver_(env_) {
  cfg_.validate();
  Rng rngU(Rng::deriveSeed(cfg_.seed, kStreamUniversal));
  Rng rngB(Rng::deriveSeed(cfg_.seed, kStreamBalance));
  Rng rngQ(Rng::deriveSeed(cfg_.seed, kStreamQ));
  Rng rngV(Rng::deriveSeed(cfg_.seed, kStreamV));
  u_ = makeUniversal(env_, cfg_, rngU);
  b_ = BalanceModel::make(env_.obsDim(), cfg_.hidden, cfg_.space, rngB);
  q_ = makeQ(env_, cfg_, rngQ);
  qTarg_ = q_;  // targets start as an exact copy
  v_ = algos::VNetwork::make(env_.obsDim(), cfg_.hidden, rngV);
  const numkit::AdamConfig ac{cfg_.lr, 0.9, 0.999, 1e-8};
  optU_ = numkit::Adam(u_.trunk, ac);
  optB_ = numkit::Adam(b_.trunk, ac);
  optQ_ = numkit::Adam(q_.net, ac);
  optV_ = numkit::Adam(v_.net, ac);
}

void Trainer::loadDataset(const std::vector<data::Transition>& ts) {
  if (ts.empty()) throw std::invalid_argument("Trainer: empty dataset");
  buffer_.pushAll(ts);
  std::int64_t maxEp = 0;
  for (const data::Transition& t : ts) maxEp = std::max(maxEp, t.episode);
  episodeIdx_ = maxEp + 1;
}

Trainer::Batch Trainer::assembleBatch(const std::vector<std::size_t>& idx) const {
  Batch bt;
  const Index B = static_cast<Index>(idx.size());
  const int od = env_.obsDim();
  const int ad = env_.actions().dim();
  bt.obs.resize(od, B);
  bt.obsNext.resize(od, B);
  bt.actRaw.resize(ad, B);
  bt.rewards.resize(B);
  bt.notDone.resize(B);
  for (Index i = 0; i < B; ++i) {
    const data::Transition& t = buffer_.at(idx[static_cast<std::size_t>(i)]);
    env_.encodeObsInto(t.s, bt.obs.col(i));
    env_.encodeObsInto(t.s_next, bt.obsNext.col(i));
    bt.actRaw.col(i) = t.a;
    bt.rewards(i) = t.r;
    bt.notDone(i) = t.done ? 0.0 : 1.0;
  }
  return bt;
}

Row Trainer::minibatchBeta(const Batch& bt, bool offline) {
  const Index B = bt.obs.cols();
  Row beta(B);
  if (cfg_.selector == Selector::kFixed) {
    beta.setConstant(cfg_.fixed_beta);
    return beta;
  }
  if (offline) {
    // Offline phase: uniform coefficients expose the whole family.
    for (Index i = 0; i < B; ++i)
      beta(i) = rngBeta_.uniform(cfg_.space.beta_min, cfg_.space.beta_max);
    if (cfg_.record_offline_beta)
      for (Index i = 0; i < B; ++i) offlineBetaLog_.push_back(beta(i));
    return beta;
  }
  switch (cfg_.selector) {
    case Selector::kBalance:
      for (Index i = 0; i < B; ++i)
        beta(i) = b_.sampleBeta(bt.obs.col(i), rngBeta_);
      break;
    case Selector::kRandom:
      for (Index i = 0; i < B; ++i)
        beta(i) = rngBeta_.uniform(cfg_.space.beta_min, cfg_.space.beta_max);
      break;
    case Selector::kAnneal:
      beta.setConstant(scheduledBeta(onlineStep_));
      break;
    case Selector::kFixed:
      break;  // handled above
  }
  return beta;
}

double Trainer::scheduledBeta(long k) const {
  if (cfg_.selector == Selector::kFixed) return cfg_.fixed_beta;
  if (cfg_.selector != Selector::kAnneal)
    throw std::runtime_error("scheduledBeta: selector has no deterministic schedule");
  if (cfg_.online_steps <= 1) return cfg_.space.beta_max;
  const long kc = std::min(std::max(k, 0L), cfg_.online_steps - 1);
  const double f = static_cast<double>(kc) /
                   static_cast<double>(cfg_.online_steps - 1);
  return cfg_.space.beta_min + f * (cfg_.space.beta_max - cfg_.space.beta_min);
}

Row Trainer::bootstrapTargets(const Batch& bt, const Row& beta) {
  const Index B = bt.obs.cols();
  Row nextValue(B);
  if (cfg_.algo == Algo::kIql) {
    nextValue = v_.values(bt.obsNext);
  } else if (env_.actions().kind == envs::ActionKind::kDiscrete) {
    // Exact expected target-critic value under the conditional policy.
    const Mat qn = qTarg_.allValues(bt.obsNext);
    for (Index i = 0; i < B; ++i) {
      const numkit::SoftmaxHead h =
          u_.softmaxAt(bt.obsNext.col(i), beta(i));
      nextValue(i) = h.probs().dot(qn.col(i));
    }
  } else {
    Mat aNext(env_.actions().dim(), B);
    for (Index i = 0; i < B; ++i)
      aNext.col(i) = u_.sampleAction(bt.obsNext.col(i), beta(i), rngWeights_);
    nextValue = qTarg_.dataValues(bt.obsNext, aNext);
  }
  return (bt.rewards.array() +
          cfg_.gamma * bt.notDone.array() * nextValue.array())
      .matrix();
}

void Trainer::valueUpdate(const Batch& bt, const Row& beta) {
  switch (cfg_.algo) {
    case Algo::kIql: {
      const Row qd = qTarg_.dataValues(bt.obs, bt.actRaw);
      lastVLoss_ = algos::expectileUpdate(v_, optV_, bt.obs, qd,
                                          cfg_.expectile_tau);
      const Row targets = bootstrapTargets(bt, beta);
      lastQLoss_ = algos::tdUpdate(q_, optQ_, bt.obs, bt.actRaw, targets);
      break;
    }
    case Algo::kAwac: {
      const Row targets = bootstrapTargets(bt, beta);
      lastQLoss_ = algos::tdUpdate(q_, optQ_, bt.obs, bt.actRaw, targets);
      break;
    }
    case Algo::kCql: {
      const Row targets = bootstrapTargets(bt, beta);
      Mat sampled;
      if (env_.actions().kind == envs::ActionKind::kBox) {
        const Index B = bt.obs.cols();
        const int d = env_.actions().dim();
        const int M = cfg_.cql_uniform_samples + cfg_.cql_policy_samples;
        sampled.resize(d, static_cast<Index>(M) * B);
        const Vec lo = env_.actions().center - env_.actions().half;
        const Vec hi = env_.actions().center + env_.actions().half;
        for (Index i = 0; i < B; ++i) {
          Index c = i * M;
          for (int m = 0; m < cfg_.cql_uniform_samples; ++m, ++c)
            for (int k = 0; k < d; ++k)
              sampled(k, c) = rngWeights_.uniform(lo(k), hi(k));
          for (int m = 0; m < cfg_.cql_policy_samples; ++m, ++c)
            sampled.col(c) = u_.sampleAction(bt.obs.col(i), beta(i), rngWeights_);
        }
      }
      lastQLoss_ = algos::cqlQUpdate(q_, optQ_, bt.obs, bt.actRaw, targets,
                                     sampled, cfg_.alpha_cql);
      break;
    }
  }
  algos::softUpdate(qTarg_.net, q_.net, cfg_.target_rho);
}

void Trainer::policyUpdate(const Batch& bt, const Row& beta) {
  const Index B = bt.obs.cols();
  if (cfg_.algo == Algo::kCql) {
    Mat noiseAct;
    if (env_.actions().kind == envs::ActionKind::kBox) {
      noiseAct.resize(env_.actions().dim(), B);
      for (Index i = 0; i < B; ++i)
        for (Index k = 0; k < noiseAct.rows(); ++k)
          noiseAct(k, i) = rngWeights_.normal();
    }
    lastMeanW_ = 0.0;  // the conservative objective carries no imitation weights
    lastUObj_ = conservativePolicyUpdate(u_, optU_, q_, bt.obs, beta, noiseAct);
    return;
  }
  const Row qd = qTarg_.dataValues(bt.obs, bt.actRaw);
  Row baseline(B);
  if (cfg_.algo == Algo::kIql) {
    baseline = v_.values(bt.obs);
  } else if (env_.actions().kind == envs::ActionKind::kDiscrete) {
    const Mat qa = qTarg_.allValues(bt.obs);
    for (Index i = 0; i < B; ++i) {
      const numkit::SoftmaxHead h = u_.softmaxAt(bt.obs.col(i), beta(i));
      baseline(i) = h.probs().dot(qa.col(i));
    }
  } else {
    for (Index i = 0; i < B; ++i) {
      double acc = 0.0;
      Mat a(env_.actions().dim(), 1);
      for (int k = 0; k < cfg_.policy_samples; ++k) {
        a.col(0) = u_.sampleAction(bt.obs.col(i), beta(i), rngWeights_);
        acc += qTarg_.dataValues(bt.obs.col(i), a)(0);
      }
      baseline(i) = acc / cfg_.policy_samples;
    }
  }
  const Row w = imitationWeights(beta, qd, baseline, cfg_.weight_cap);
  lastMeanW_ = w.mean();
  lastUObj_ = universalUpdate(u_, optU_, bt.obs, bt.actRaw, beta, w);
}

void Trainer::maybeBalanceUpdate(const Batch& bt) {
  if (cfg_.selector != Selector::kBalance) return;
  if ((step_ + 1) % cfg_.balance_update_freq != 0) return;
  const Index B = bt.obs.cols();
  Row noiseBeta = Row::Zero(B);
  if (!cfg_.balance_sample_mean)
    for (Index i = 0; i < B; ++i) noiseBeta(i) = rngBalance_.normal();
  Mat noiseAct;
  if (env_.actions().kind == envs::ActionKind::kBox) {
    noiseAct.resize(env_.actions().dim(), B);
    for (Index i = 0; i < B; ++i)
      for (Index k = 0; k < noiseAct.rows(); ++k)
        noiseAct(k, i) = rngBalance_.normal();
  }
  lastBObj_ = balanceUpdate(b_, optB_, u_, q_, bt.obs, noiseBeta, noiseAct);
}

void Trainer::gradientStep(bool offline) {
  const auto idx =
      buffer_.sampleIndices(static_cast<std::size_t>(cfg_.batch_size), rngSampler_);
  const Batch bt = assembleBatch(idx);
  const Row beta = minibatchBeta(bt, offline);
  lastMeanBeta_ = beta.mean();
  lastStdBeta_ =
      std::sqrt(std::max(0.0, beta.array().square().mean() -
                                  lastMeanBeta_ * lastMeanBeta_));
  policyUpdate(bt, beta);
  maybeBalanceUpdate(bt);
  valueUpdate(bt, beta);
  ++step_;
  if (step_ % cfg_.log_every == 0) logRow(offline);
}

void Trainer::offlineStep() { gradientStep(true); }

void Trainer::onlineStep() {
  if (!driver_.active()) driver_.reset(rngEnv_);
  const Vec raw = driver_.state();
  const Vec obsEnc = env_.encodeObs(raw);
  const double beta = interactionBeta(obsEnc);
  onlineBetaLog_.push_back(beta);
  const Vec a = u_.sampleAction(obsEnc, beta, rngEnv_);
  const int t = driver_.stepsTaken();
  const envs::StepOutcome out = driver_.step(a);
  buffer_.push(data::Transition{raw, a, out.reward, out.next, out.done,
                                episodeIdx_, t});
  if (out.done) ++episodeIdx_;
  gradientStep(false);
  ++onlineStep_;
}

void Trainer::runOffline() {
  if (buffer_.size() == 0)
    throw std::runtime_error("Trainer: offline phase needs a dataset");
  for (long k = 0; k < cfg_.offline_steps; ++k) offlineStep();
}

void Trainer::runOnline() {
  for (long k = 0; k < cfg_.online_steps; ++k) onlineStep();
}

double Trainer::interactionBeta(const Vec& obsEnc) {
  // Coefficient choices draw from the beta stream, never the environment
  // stream, so selectors that need no draw (fixed, anneal) leave the
  // environment stream in exactly the same position as selectors that do.
  switch (cfg_.selector) {
    case Selector::kBalance:
      return b_.sampleBeta(obsEnc, rngBeta_);
    case Selector::kFixed:
      return cfg_.fixed_beta;
    case Selector::kRandom:
      return rngBeta_.uniform(cfg_.space.beta_min, cfg_.space.beta_max);
    case Selector::kAnneal:
      return scheduledBeta(onlineStep_);
  }
  throw std::logic_error("interactionBeta: unknown selector");
}

EvalReport Trainer::evaluate(int episodes) {
  if (episodes < 1) throw std::invalid_argument("evaluate: episodes < 1");
  EvalReport rep;
  double betaSum = 0.0;
  long betaCount = 0;
  envs::EpisodeDriver driver(env_);
  for (int e = 0; e < episodes; ++e) {
    driver.reset(rngEval_);
    double ret = 0.0;
    while (driver.active()) {
      const Vec obsEnc = env_.encodeObs(driver.state());
      double beta = 0.0;
      switch (cfg_.selector) {
        case Selector::kBalance:
          beta = b_.meanBeta(obsEnc);
          break;
        case Selector::kFixed:
          beta = cfg_.fixed_beta;
          break;
        case Selector::kRandom:
          beta = rngEval_.uniform(cfg_.space.beta_min, cfg_.space.beta_max);
          break;
        case Selector::kAnneal:
          beta = scheduledBeta(onlineStep_ > 0 ? onlineStep_ - 1 : 0);
          break;
      }
      betaSum += beta;
      ++betaCount;
      const envs::StepOutcome out = driver.step(u_.modeAction(obsEnc, beta));
      ret += out.reward;
    }
    rep.returns.push_back(ret);
  }
  rep.ret = data::meanConfidence(rep.returns);
  rep.mean_beta = betaCount > 0 ? betaSum / static_cast<double>(betaCount) : 0.0;
  return rep;
}

void Trainer::appendEvalRow(const EvalReport& report) {
  MetricsRow row;
  row.step = step_;
  row.phase = onlineStep_ > 0 ? 1 : 0;
  row.mean_beta = lastMeanBeta_;
  row.std_beta = lastStdBeta_;
  row.mean_weight = lastMeanW_;
  row.universal_obj = lastUObj_;
  row.balance_obj = lastBObj_;
  row.v_loss = lastVLoss_;
  row.q_loss = lastQLoss_;
  row.has_eval = true;
  row.eval_mean = report.ret.mean;
  row.eval_ci = report.ret.halfWidth;
  metrics_.push_back(row);
}

void Trainer::logRow(bool offline) {
  MetricsRow row;
  row.step = step_;
  row.phase = offline ? 0 : 1;
  row.mean_beta = lastMeanBeta_;
  row.std_beta = lastStdBeta_;
  row.mean_weight = lastMeanW_;
  row.universal_obj = lastUObj_;
  row.balance_obj = lastBObj_;
  row.v_loss = lastVLoss_;
  row.q_loss = lastQLoss_;
  metrics_.push_back(row);
}

void writeMetricsCsv(const std::string& path, const std::vector<MetricsRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open metrics file: " + path);
  out << "step,phase,mean_beta,std_beta,mean_weight,universal_obj,balance_obj,"
         "v_loss,q_loss,eval_mean,eval_ci\n";
  for (const MetricsRow& r : rows) {
    out << r.step << ',' << r.phase << ',' << util::formatDouble(r.mean_beta)
        << ',' << util::formatDouble(r.std_beta) << ','
        << util::formatDouble(r.mean_weight) << ','
        << util::formatDouble(r.universal_obj) << ','
        << util::formatDouble(r.balance_obj) << ','
        << util::formatDouble(r.v_loss) << ',' << util::formatDouble(r.q_loss)
        << ',';
    if (r.has_eval) {
      out << util::formatDouble(r.eval_mean) << ','
          << util::formatDouble(r.eval_ci);
    } else {
      out << ',';
    }
    out << '\n';
  }
}

void Trainer::saveModels(const std::string& path) const {
  std::vector<std::pair<std::string, const numkit::Mlp*>> nets;
  nets.emplace_back("universal", &u_.trunk);
  nets.emplace_back("balance", &b_.trunk);
  nets.emplace_back("q", &q_.net);
  nets.emplace_back("q_target", &qTarg_.net);
  if (cfg_.algo == Algo::kIql) nets.emplace_back("v", &v_.net);
  numkit::saveCheckpoint(path, nets);
}

void Trainer::loadModels(const std::string& path) {
  auto nets = numkit::loadCheckpoint(path);
  for (auto& [name, net] : nets) {
    numkit::Mlp* dst = nullptr;
    if (name == "universal") dst = &u_.trunk;
    else if (name == "balance") dst = &b_.trunk;
    else if (name == "q") dst = &q_.net;
    else if (name == "q_target") dst = &qTarg_.net;
    else if (name == "v") dst = &v_.net;
    if (dst == nullptr)
      throw std::runtime_error("loadModels: unknown network '" + name + "'");
    if (dst->dims() != net.dims())
      throw std::runtime_error("loadModels: shape mismatch for '" + name + "'");
    *dst = std::move(net);
  }
}

}  // namespace core
}  // namespace famo2o
