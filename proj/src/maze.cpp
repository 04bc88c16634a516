#include "famo2o/envs/maze.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace famo2o {
namespace envs {

namespace {

constexpr double kStepReward = -1.0;
constexpr double kGoalReward = 10.0;

Cell moved(Cell c, int action) {
  switch (action) {
    case kUp: return {c.row - 1, c.col};
    case kDown: return {c.row + 1, c.col};
    case kLeft: return {c.row, c.col - 1};
    case kRight: return {c.row, c.col + 1};
    default: throw std::invalid_argument("mazeStep: action out of range");
  }
}

}  // namespace

MazeSpec MazeSpec::defaultSpec() {
  MazeSpec spec;
  spec.walls = {{0, 2}, {1, 1}, {1, 2}, {2, 2}, {3, 2}, {4, 2}, {4, 3}, {4, 5}};
  spec.goal = {5, 5};
  spec.upper_crossing = {1, 0};
  spec.lower_crossing = {4, 4};
  spec.max_episode_steps = 60;
  return spec;
}

bool MazeSpec::blockedCell(Cell c) const {
  return std::find(walls.begin(), walls.end(), c) != walls.end();
}

void MazeSpec::validate() const {
  if (rows <= 0 || cols <= 0) {
    throw std::invalid_argument("MazeSpec: non-positive dimensions");
  }
  for (Cell w : walls) {
    if (!inBounds(w)) throw std::invalid_argument("MazeSpec: wall out of bounds");
  }
  auto checkOpen = [&](Cell c, const char* what) {
    if (!inBounds(c)) {
      throw std::invalid_argument(std::string("MazeSpec: ") + what + " out of bounds");
    }
    if (blockedCell(c)) {
      throw std::invalid_argument(std::string("MazeSpec: ") + what + " is a wall");
    }
  };
  checkOpen(goal, "goal");
  checkOpen(upper_crossing, "upper_crossing");
  checkOpen(lower_crossing, "lower_crossing");
  if (upper_crossing == lower_crossing) {
    throw std::invalid_argument("MazeSpec: crossings must differ");
  }
  const std::vector<Cell> starts = openTopRowCells(*this);
  if (starts.empty()) throw std::invalid_argument("MazeSpec: no open top-row cell");
  const std::vector<int> dist = bfsDistanceToGoal(*this);
  for (Cell s : starts) {
    if (dist[cellIndex(s)] < 0) {
      throw std::invalid_argument("MazeSpec: goal unreachable from a top-row cell");
    }
  }
  bool lowerUsed = false, upperUsed = false;
  for (Cell s : starts) {
    for (Cell c : canonicalPath(*this, s)) {
      if (c == lower_crossing) lowerUsed = true;
      if (c == upper_crossing) upperUsed = true;
    }
  }
  if (!lowerUsed || !upperUsed) {
    throw std::invalid_argument(
        "MazeSpec: each crossing must lie on the canonical path of some start");
  }
}

MazeStepResult mazeStep(const MazeSpec& spec, Cell state, int action) {
  if (!spec.inBounds(state) || spec.blockedCell(state)) {
    throw std::invalid_argument("mazeStep: state is not an open cell");
  }
  Cell next = moved(state, action);
  if (!spec.inBounds(next) || spec.blockedCell(next)) next = state;
  MazeStepResult out;
  out.next = next;
  out.atGoal = next == spec.goal;
  out.reward = out.atGoal ? kGoalReward : kStepReward;
  return out;
}

std::vector<int> bfsDistanceToGoal(const MazeSpec& spec) {
  std::vector<int> dist(static_cast<std::size_t>(spec.rows) * spec.cols, -1);
  std::deque<Cell> queue;
  dist[spec.cellIndex(spec.goal)] = 0;
  queue.push_back(spec.goal);
  while (!queue.empty()) {
    const Cell c = queue.front();
    queue.pop_front();
    const int d = dist[spec.cellIndex(c)];
    for (int a = 0; a < kMazeActionCount; ++a) {
      const Cell n = moved(c, a);
      if (!spec.inBounds(n) || spec.blockedCell(n)) continue;
      if (dist[spec.cellIndex(n)] >= 0) continue;
      dist[spec.cellIndex(n)] = d + 1;
      queue.push_back(n);
    }
  }
  return dist;
}

int bfsGreedyAction(const MazeSpec& spec, const std::vector<int>& dist, Cell c) {
  const int here = dist[spec.cellIndex(c)];
  if (here < 0) throw std::invalid_argument("bfsGreedyAction: goal unreachable");
  for (int a = 0; a < kMazeActionCount; ++a) {
    const Cell n = moved(c, a);
    if (!spec.inBounds(n) || spec.blockedCell(n)) continue;
    if (dist[spec.cellIndex(n)] == here - 1) return a;
  }
  throw std::logic_error("bfsGreedyAction: no descending neighbor");
}

std::vector<Cell> openTopRowCells(const MazeSpec& spec) {
  std::vector<Cell> out;
  for (int c = 0; c < spec.cols; ++c) {
    const Cell cell{0, c};
    if (!spec.blockedCell(cell)) out.push_back(cell);
  }
  return out;
}

std::vector<Cell> canonicalPath(const MazeSpec& spec, Cell start) {
  const std::vector<int> dist = bfsDistanceToGoal(spec);
  if (dist[spec.cellIndex(start)] < 0) {
    throw std::invalid_argument("canonicalPath: goal unreachable from start");
  }
  std::vector<Cell> path{start};
  Cell c = start;
  while (c != spec.goal) {
    const int a = bfsGreedyAction(spec, dist, c);
    c = mazeStep(spec, c, a).next;
    path.push_back(c);
  }
  return path;
}

bool startIsGuided(const MazeSpec& spec, Cell start) {
  for (Cell c : canonicalPath(spec, start)) {
    if (c == spec.lower_crossing) return true;
  }
  return false;
}

std::vector<bool> guidedRouteMask(const MazeSpec& spec) {
  std::vector<bool> mask(static_cast<std::size_t>(spec.rows) * spec.cols, false);
  for (Cell s : openTopRowCells(spec)) {
    if (!startIsGuided(spec, s)) continue;
    for (Cell c : canonicalPath(spec, s)) mask[spec.cellIndex(c)] = true;
  }
  return mask;
}

MazeDataset collectMazeDataset(const MazeSpec& spec, int n_episodes,
                               MazeDatasetMode mode, numkit::Rng& rng) {
  if (n_episodes < 0) throw std::invalid_argument("collectMazeDataset: negative count");
  spec.validate();
  const std::vector<int> dist = bfsDistanceToGoal(spec);
  std::vector<Cell> guidedStarts, unguidedStarts, allStarts = openTopRowCells(spec);
  for (Cell s : allStarts) {
    (startIsGuided(spec, s) ? guidedStarts : unguidedStarts).push_back(s);
  }

  MazeDataset out;
  for (int e = 0; e < n_episodes; ++e) {
    bool guidedEpisode;
    Cell start;
    switch (mode) {
      case MazeDatasetMode::kMixed:
        // Alternate route families; starts are uniform within the family.
        guidedEpisode = e % 2 == 0;
        start = guidedEpisode
                    ? guidedStarts[static_cast<std::size_t>(rng.uniformInt(
                          0, static_cast<std::int64_t>(guidedStarts.size()) - 1))]
                    : unguidedStarts[static_cast<std::size_t>(rng.uniformInt(
                          0, static_cast<std::int64_t>(unguidedStarts.size()) - 1))];
        break;
      case MazeDatasetMode::kGuidedOnly:
      case MazeDatasetMode::kRandomOnly:
        guidedEpisode = mode == MazeDatasetMode::kGuidedOnly;
        start = allStarts[static_cast<std::size_t>(
            rng.uniformInt(0, static_cast<std::int64_t>(allStarts.size()) - 1))];
        break;
      default:
        throw std::invalid_argument("collectMazeDataset: unknown mode");
    }

    EpisodeSummary summary;
    summary.episode = e;
    summary.route = guidedEpisode ? "guided" : "unguided";

    Cell c = start;
    bool guidanceActive = guidedEpisode;
    for (int t = 0; t < spec.max_episode_steps; ++t) {
      // Guidance also kicks in the moment an unguided walker stands on the
      // lower crossing.
      if (!guidanceActive && c == spec.lower_crossing) guidanceActive = true;
      const int a = guidanceActive
                        ? bfsGreedyAction(spec, dist, c)
                        : static_cast<int>(rng.uniformInt(0, kMazeActionCount - 1));
      const MazeStepResult step = mazeStep(spec, c, a);
      data::Transition tr;
      tr.s = MazeEnv::fromCell(c);
      tr.a = numkit::Vec::Constant(1, static_cast<double>(a));
      tr.r = step.reward;
      tr.s_next = MazeEnv::fromCell(step.next);
      tr.done = step.atGoal || t + 1 >= spec.max_episode_steps;
      tr.episode = e;
      tr.t = t;
      out.transitions.push_back(std::move(tr));
      summary.ret += step.reward;
      ++summary.length;
      c = step.next;
      if (step.atGoal) break;
    }
    out.episodes.push_back(std::move(summary));
  }
  return out;
}

MazeEnv::MazeEnv(MazeSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  actions_.kind = ActionKind::kDiscrete;
  actions_.n = kMazeActionCount;
  starts_ = openTopRowCells(spec_);
}

numkit::Vec MazeEnv::sampleInitial(numkit::Rng& rng) const {
  const Cell c = starts_[static_cast<std::size_t>(
      rng.uniformInt(0, static_cast<std::int64_t>(starts_.size()) - 1))];
  return fromCell(c);
}

void MazeEnv::transition(const numkit::Vec& s, const numkit::Vec& a,
                         numkit::Vec* next, double* reward,
                         bool* atTerminal) const {
  const MazeStepResult r = mazeStep(spec_, toCell(s), static_cast<int>(a[0]));
  *next = fromCell(r.next);
  *reward = r.reward;
  *atTerminal = r.atGoal;
}

void MazeEnv::encodeObsInto(const numkit::Vec& s,
                            Eigen::Ref<numkit::Vec> out) const {
  out.setZero();
  out[spec_.cellIndex(toCell(s))] = 1.0;
}

Cell MazeEnv::toCell(const numkit::Vec& s) {
  if (s.size() != 2) throw std::invalid_argument("MazeEnv: raw state must be (row, col)");
  return {static_cast<int>(s[0]), static_cast<int>(s[1])};
}

numkit::Vec MazeEnv::fromCell(Cell c) {
  numkit::Vec v(2);
  v << static_cast<double>(c.row), static_cast<double>(c.col);
  return v;
}

}  // namespace envs
}  // namespace famo2o
