#pragma once

#include <memory>
#include <stdexcept>

#include "famo2o/numkit/rng.hpp"
#include "famo2o/numkit/types.hpp"

namespace famo2o {
namespace envs {

enum class ActionKind { kDiscrete, kBox };

struct ActionSpace {
  ActionKind kind = ActionKind::kDiscrete;
  int n = 0;                          // discrete action count
  numkit::Vec center, half;           // box bounds: [center - half, center + half]

  int dim() const {
    return kind == ActionKind::kDiscrete ? 1 : static_cast<int>(center.size());
  }
};

/// Stateless view of an environment: dynamics, initial-state sampling and the
/// feature encoding the networks consume. Episode bookkeeping (current state,
/// step cap) lives in EpisodeDriver.
class EnvModel {
 public:
  virtual ~EnvModel() = default;

  virtual int rawStateDim() const = 0;
  virtual int obsDim() const = 0;
  virtual const ActionSpace& actions() const = 0;
  virtual int maxEpisodeSteps() const = 0;

  virtual numkit::Vec sampleInitial(numkit::Rng& rng) const = 0;

  /// One transition in raw coordinates. `atTerminal` is true when `next` is
  /// a true terminal state (independent of the step cap).
  virtual void transition(const numkit::Vec& s, const numkit::Vec& a,
                          numkit::Vec* next, double* reward,
                          bool* atTerminal) const = 0;

  virtual void encodeObsInto(const numkit::Vec& s,
                             Eigen::Ref<numkit::Vec> out) const = 0;

  numkit::Vec encodeObs(const numkit::Vec& s) const {
    numkit::Vec out(obsDim());
    encodeObsInto(s, out);
    return out;
  }
};

struct StepOutcome {
  numkit::Vec next;
  double reward = 0.0;
  bool done = false;  // terminal state reached or step cap hit
};

/// Holds the current raw state and step count of one running episode and
/// marks `done` both at terminal states and at the step cap.
class EpisodeDriver {
 public:
  explicit EpisodeDriver(const EnvModel& model) : model_(model) {}

  const numkit::Vec& state() const {
    if (!active_) throw std::runtime_error("EpisodeDriver: no active episode");
    return state_;
  }
  bool active() const { return active_; }
  int stepsTaken() const { return t_; }

  const numkit::Vec& reset(numkit::Rng& rng) {
    state_ = model_.sampleInitial(rng);
    t_ = 0;
    active_ = true;
    return state_;
  }

  StepOutcome step(const numkit::Vec& action) {
    if (!active_) throw std::runtime_error("EpisodeDriver: step before reset");
    StepOutcome out;
    bool terminal = false;
    model_.transition(state_, action, &out.next, &out.reward, &terminal);
    ++t_;
    out.done = terminal || t_ >= model_.maxEpisodeSteps();
    state_ = out.next;
    if (out.done) active_ = false;
    return out;
  }

 private:
  const EnvModel& model_;
  numkit::Vec state_;
  int t_ = 0;
  bool active_ = false;
};

}  // namespace envs
}  // namespace famo2o
