#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "famo2o/algos/values.hpp"
#include "famo2o/core/models.hpp"
#include "famo2o/data/transition.hpp"
#include "famo2o/envs/maze.hpp"
#include "famo2o/numkit/types.hpp"

namespace famo2o {
namespace analysis {

/// Uncapped advantage-tilted weights exp(beta * (q - v)). The training path
/// clamps these; the diagnostic keeps the raw magnitude and counts entries
/// that overflowed to +inf instead of hiding them.
numkit::Row rawImitationWeights(const numkit::Row& beta, const numkit::Row& q,
                                const numkit::Row& v,
                                long* overflowCount = nullptr);

/// Squared distance between two actions of the same kind: grid actions are
/// compared through their unit displacement vectors (so Up vs Down is 4,
/// Up vs Left is 2, Up vs Up is 0), box actions directly.
double actionDistanceSquared(const numkit::Vec& a, const numkit::Vec& b,
                             envs::ActionKind kind);

struct BetaStats {
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
  double min = 0.0;
  double max = 0.0;
  std::size_t n = 0;
};

BetaStats betaStatistics(const std::vector<double>& xs);

/// Balance-coefficient map over the maze: deterministic rollouts from every
/// open top-row start, recording the balance model's mean coefficient at each
/// visited cell. Guided/unguided aggregates follow the canonical-route mask
/// (visit-weighted).
struct MazeBetaMap {
  numkit::Mat mean_beta;        // rows x cols, NaN where never visited
  numkit::MatX<int> visits;     // rows x cols
  double mean_guided = 0.0;     // over visits to canonical guided-route cells
  double mean_unguided = 0.0;   // over visits to all other cells
  long guided_visits = 0;
  long unguided_visits = 0;
};

MazeBetaMap mazeBetaMap(const envs::MazeEnv& env, const core::UniversalModel& u,
                        const core::BalanceModel& b);

void writeBetaMapCsv(const std::string& path, const MazeBetaMap& map);

/// Per-episode comparison of an adaptive policy against a fixed-coefficient
/// baseline along the same stored trajectories: the imitation weight each
/// policy assigns to the logged actions (shared critic) and the squared
/// distance between their greedy actions, sorted by episode return.
struct TrajectoryDiff {
  std::int64_t episode = 0;
  double ret = 0.0;
  double mean_weight_adaptive = 0.0;
  double mean_weight_baseline = 0.0;
  double mean_action_dist = 0.0;
};

std::vector<TrajectoryDiff> diffVsBaseline(
    const std::vector<data::Transition>& ts, const envs::EnvModel& env,
    const core::UniversalModel& adaptive, const core::BalanceModel& adaptiveBalance,
    const core::UniversalModel& baseline, double baselineBeta,
    const algos::QNetwork& qTarget, const algos::VNetwork& v, double weightCap);

void writeDiffCsv(const std::string& path, const std::vector<TrajectoryDiff>& rows);

}  // namespace analysis
}  // namespace famo2o
