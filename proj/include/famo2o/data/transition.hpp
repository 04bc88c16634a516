#pragma once

#include <cstdint>

#include "famo2o/numkit/types.hpp"

namespace famo2o {
namespace data {

/// One environment step in raw (un-encoded) coordinates. Discrete actions are
/// stored as a single-entry vector holding the action index; `done` marks a
/// transition into a terminal situation (goal reached or episode step cap).
struct Transition {
  numkit::Vec s;
  numkit::Vec a;
  double r = 0.0;
  numkit::Vec s_next;
  bool done = false;
  std::int64_t episode = 0;
  int t = 0;
};

}  // namespace data
}  // namespace famo2o
