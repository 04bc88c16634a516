#include "famo2o/envs/pointmass.hpp"

#include <cmath>
#include <stdexcept>

namespace famo2o {
namespace envs {

void PointMassSpec::validate() const {
  if (!(pos_min < pos_max)) {
    throw std::invalid_argument("PointMassSpec: empty position box");
  }
  if (!(action_max > 0.0)) {
    throw std::invalid_argument("PointMassSpec: action_max must be positive");
  }
  if (goal.size() != 2) throw std::invalid_argument("PointMassSpec: goal must be 2-d");
  for (int i = 0; i < 2; ++i) {
    if (goal[i] < pos_min || goal[i] > pos_max) {
      throw std::invalid_argument("PointMassSpec: goal outside position box");
    }
  }
  if (!(goal_radius > 0.0)) {
    throw std::invalid_argument("PointMassSpec: goal_radius must be positive");
  }
}

PointMassStepResult pointmassStep(const PointMassSpec& spec, const numkit::Vec& s,
                                  const numkit::Vec& a,
                                  numkit::ClampCounter* counter) {
  if (s.size() != 2 || a.size() != 2) {
    throw std::invalid_argument("pointmassStep: state and action must be 2-d");
  }
  numkit::Vec act = a;
  bool clamped = false;
  for (int i = 0; i < 2; ++i) {
    if (act[i] > spec.action_max || act[i] < -spec.action_max) {
      act[i] = std::min(spec.action_max, std::max(-spec.action_max, act[i]));
      clamped = true;
    }
  }
  if (clamped && counter != nullptr) ++counter->count;
  PointMassStepResult out;
  out.next = (s + act).array().max(spec.pos_min).min(spec.pos_max).matrix();
  const double dist = (out.next - spec.goal).norm();
  out.reward = -dist;
  out.atGoal = dist <= spec.goal_radius;
  return out;
}

numkit::Vec pointmassGreedyAction(const PointMassSpec& spec, const numkit::Vec& s) {
  return (spec.goal - s).array().max(-spec.action_max).min(spec.action_max).matrix();
}

PointMassDataset collectPointmassDataset(const PointMassSpec& spec, int n_episodes,
                                         numkit::Rng& rng) {
  if (n_episodes < 0) {
    throw std::invalid_argument("collectPointmassDataset: negative count");
  }
  spec.validate();
  const double noiseStd = 0.03;
  PointMassDataset out;
  for (int e = 0; e < n_episodes; ++e) {
    const bool noisyGreedy = e % 2 == 0;
    if (noisyGreedy) out.noisyGreedyEpisodes.push_back(e);
    numkit::Vec s(2);
    s << rng.uniform(spec.pos_min, spec.pos_max),
        rng.uniform(spec.pos_min, spec.pos_max);
    for (int t = 0; t < spec.max_episode_steps; ++t) {
      numkit::Vec a(2);
      if (noisyGreedy) {
        a = pointmassGreedyAction(spec, s);
        a[0] += noiseStd * rng.normal();
        a[1] += noiseStd * rng.normal();
        a = a.array().max(-spec.action_max).min(spec.action_max).matrix();
      } else {
        a << rng.uniform(-spec.action_max, spec.action_max),
            rng.uniform(-spec.action_max, spec.action_max);
      }
      const PointMassStepResult step = pointmassStep(spec, s, a);
      data::Transition tr;
      tr.s = s;
      tr.a = a;
      tr.r = step.reward;
      tr.s_next = step.next;
      tr.done = step.atGoal || t + 1 >= spec.max_episode_steps;
      tr.episode = e;
      tr.t = t;
      out.transitions.push_back(std::move(tr));
      s = step.next;
      if (step.atGoal) break;
    }
  }
  return out;
}

PointMassEnv::PointMassEnv(PointMassSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  actions_.kind = ActionKind::kBox;
  actions_.center = numkit::Vec::Zero(2);
  actions_.half = numkit::Vec::Constant(2, spec_.action_max);
}

numkit::Vec PointMassEnv::sampleInitial(numkit::Rng& rng) const {
  numkit::Vec s(2);
  s << rng.uniform(spec_.pos_min, spec_.pos_max),
      rng.uniform(spec_.pos_min, spec_.pos_max);
  return s;
}

void PointMassEnv::transition(const numkit::Vec& s, const numkit::Vec& a,
                              numkit::Vec* next, double* reward,
                              bool* atTerminal) const {
  const PointMassStepResult r = pointmassStep(spec_, s, a, &clamps_);
  *next = r.next;
  *reward = r.reward;
  *atTerminal = r.atGoal;
}

void PointMassEnv::encodeObsInto(const numkit::Vec& s,
                                 Eigen::Ref<numkit::Vec> out) const {
  out = s;
}

}  // namespace envs
}  // namespace famo2o
