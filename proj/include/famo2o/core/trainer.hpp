#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "famo2o/algos/values.hpp"
#include "famo2o/core/models.hpp"
#include "famo2o/core/updates.hpp"
#include "famo2o/data/replay.hpp"
#include "famo2o/data/stats.hpp"
#include "famo2o/envs/env.hpp"

namespace famo2o {
namespace core {

/// Base update rule for the conditional policy and its critics.
enum class Algo { kIql, kAwac, kCql };

/// How the balance coefficient is chosen during the online phase and at
/// evaluation time. kBalance learns the state-conditional model; the other
/// three are fixed, per-step-random and linearly annealed baselines.
enum class Selector { kBalance, kFixed, kRandom, kAnneal };

struct TrainConfig {
  Algo algo = Algo::kIql;
  Selector selector = Selector::kBalance;
  double fixed_beta = 2.0;  // kFixed only
  numkit::BalanceSpace space;

  std::vector<numkit::Index> hidden{64, 64};
  double lr = 3e-4;
  double gamma = 0.99;
  double expectile_tau = 0.7;  // kIql value regression
  double target_rho = 5e-3;    // critic target soft-update rate
  double weight_cap = 100.0;   // imitation weight clamp
  int policy_samples = 4;      // kAwac baseline-value samples (box heads)
  int cql_uniform_samples = 8;
  int cql_policy_samples = 8;
  double alpha_cql = 1.0;  // conservative critic penalty coefficient

  int batch_size = 64;
  long offline_steps = 20000;
  long online_steps = 20000;
  int balance_update_freq = 1;
  bool balance_sample_mean = false;  // latent mean instead of a reparam draw
  std::size_t buffer_capacity = 200000;
  long log_every = 1000;
  std::uint64_t seed = 1;
  bool record_offline_beta = false;

  void validate() const;
};

struct EvalReport {
  data::MeanCi ret;
  std::vector<double> returns;
  double mean_beta = 0.0;  // mean coefficient over all evaluation steps
};

struct MetricsRow {
  long step = 0;
  int phase = 0;  // 0 offline, 1 online
  double mean_beta = 0.0;    // minibatch coefficient mean at this step
  double std_beta = 0.0;     // minibatch coefficient spread
  double mean_weight = 0.0;  // mean imitation weight (0 under the
                             // conservative update, which has none)
  double universal_obj = 0.0;
  double balance_obj = 0.0;
  double v_loss = 0.0;
  double q_loss = 0.0;
  bool has_eval = false;
  double eval_mean = 0.0;
  double eval_ci = 0.0;
};

void writeMetricsCsv(const std::string& path, const std::vector<MetricsRow>& rows);

/// Offline-to-online training loop: a conditional policy plus balance model
/// on top of one of the base update rules. Every random decision draws from
/// its own seeded stream (network init, minibatch sampling, coefficient
/// draws, balance-update noise, environment interaction, evaluation,
/// weight/target sampling), so e.g. adding balance-model updates cannot
/// shift the value-learning path.
class Trainer {
 public:
  Trainer(const envs::EnvModel& env, TrainConfig cfg);

  void loadDataset(const std::vector<data::Transition>& ts);

  void runOffline();
  void runOnline();
  void offlineStep();
  void onlineStep();

  EvalReport evaluate(int episodes);
  void appendEvalRow(const EvalReport& report);

  const TrainConfig& config() const { return cfg_; }
  long gradientSteps() const { return step_; }
  long onlineStepsTaken() const { return onlineStep_; }
  std::size_t bufferSize() const { return buffer_.size(); }

  const UniversalModel& universal() const { return u_; }
  UniversalModel& universal() { return u_; }
  const BalanceModel& balance() const { return b_; }
  BalanceModel& balance() { return b_; }
  const algos::QNetwork& qNet() const { return q_; }
  const algos::QNetwork& qTargetNet() const { return qTarg_; }
  const algos::VNetwork& vNet() const { return v_; }

  const std::vector<double>& offlineBetaLog() const { return offlineBetaLog_; }
  /// Coefficient used at every online environment step, in step order.
  const std::vector<double>& onlineBetaLog() const { return onlineBetaLog_; }
  const std::vector<MetricsRow>& metrics() const { return metrics_; }

  /// Coefficient the selector would use at online step k (anneal schedule;
  /// fixed value; the balance/random selectors have no deterministic value
  /// and throw).
  double scheduledBeta(long k) const;

  void saveModels(const std::string& path) const;
  void loadModels(const std::string& path);

 private:
  struct Batch {
    numkit::Mat obs, obsNext, actRaw;
    numkit::Row rewards, notDone;
  };

  Batch assembleBatch(const std::vector<std::size_t>& idx) const;
  numkit::Row minibatchBeta(const Batch& bt, bool offline);
  void gradientStep(bool offline);
  void policyUpdate(const Batch& bt, const numkit::Row& beta);
  void maybeBalanceUpdate(const Batch& bt);
  void valueUpdate(const Batch& bt, const numkit::Row& beta);
  numkit::Row bootstrapTargets(const Batch& bt, const numkit::Row& beta);
  double interactionBeta(const numkit::Vec& obsEnc);
  void logRow(bool offline);

  const envs::EnvModel& env_;
  TrainConfig cfg_;
  data::ReplayBuffer buffer_;

  UniversalModel u_;
  BalanceModel b_;
  algos::QNetwork q_, qTarg_;
  algos::VNetwork v_;
  numkit::Adam optU_, optB_, optQ_, optV_;

  numkit::Rng rngSampler_, rngBeta_, rngBalance_, rngEnv_, rngEval_, rngWeights_;
  envs::EpisodeDriver driver_;

  long step_ = 0;
  long onlineStep_ = 0;
  std::int64_t episodeIdx_ = 0;
  std::vector<double> offlineBetaLog_;
  std::vector<double> onlineBetaLog_;
  std::vector<MetricsRow> metrics_;
  double lastUObj_ = 0.0, lastBObj_ = 0.0, lastVLoss_ = 0.0, lastQLoss_ = 0.0;
  double lastMeanBeta_ = 0.0, lastStdBeta_ = 0.0, lastMeanW_ = 0.0;
};

}  // namespace core
}  // namespace famo2o
