#pragma once

#include <cstdint>
#include <vector>

#include "famo2o/data/transition.hpp"
#include "famo2o/envs/env.hpp"
#include "famo2o/numkit/rng.hpp"

namespace famo2o {
namespace envs {

/// Planar point mass in [-1, 1]^2 with velocity actions in [-0.1, 0.1]^2.
/// Reward is the negative distance of the new position to the goal; episodes
/// terminate inside the goal radius.
struct PointMassSpec {
  double pos_min = -1.0;
  double pos_max = 1.0;
  double action_max = 0.1;
  numkit::Vec goal = (numkit::Vec(2) << 0.5, 0.5).finished();
  double goal_radius = 0.05;
  int max_episode_steps = 60;

  void validate() const;
};

struct PointMassStepResult {
  numkit::Vec next;
  double reward = 0.0;
  bool atGoal = false;
};

/// Actions outside the box are clamped; each clamped call bumps the counter.
PointMassStepResult pointmassStep(const PointMassSpec& spec, const numkit::Vec& s,
                                  const numkit::Vec& a,
                                  numkit::ClampCounter* counter = nullptr);

/// Straight-line action toward the goal, clamped to the action box.
numkit::Vec pointmassGreedyAction(const PointMassSpec& spec, const numkit::Vec& s);

struct PointMassDataset {
  std::vector<data::Transition> transitions;
  std::vector<std::int64_t> noisyGreedyEpisodes;  // episode ids of the guided half
};

/// Episodes alternate between noisy straight-line behavior (greedy action
/// plus Gaussian noise, higher quality) and uniform random actions (lower
/// quality); starts are uniform over the position box.
PointMassDataset collectPointmassDataset(const PointMassSpec& spec, int n_episodes,
                                         numkit::Rng& rng);

class PointMassEnv : public EnvModel {
 public:
  explicit PointMassEnv(PointMassSpec spec);

  const PointMassSpec& spec() const { return spec_; }
  std::uint64_t clampCount() const { return clamps_.count; }

  int rawStateDim() const override { return 2; }
  int obsDim() const override { return 2; }
  const ActionSpace& actions() const override { return actions_; }
  int maxEpisodeSteps() const override { return spec_.max_episode_steps; }

  numkit::Vec sampleInitial(numkit::Rng& rng) const override;
  void transition(const numkit::Vec& s, const numkit::Vec& a, numkit::Vec* next,
                  double* reward, bool* atTerminal) const override;
  void encodeObsInto(const numkit::Vec& s,
                     Eigen::Ref<numkit::Vec> out) const override;

 private:
  PointMassSpec spec_;
  ActionSpace actions_;
  mutable numkit::ClampCounter clamps_;
};

}  // namespace envs
}  // namespace famo2o
