#pragma once

#include <string>
#include <vector>

#include "famo2o/data/transition.hpp"
#include "famo2o/envs/env.hpp"
#include "famo2o/numkit/rng.hpp"

namespace famo2o {
namespace envs {

struct Cell {
  int row = 0;
  int col = 0;

  bool operator==(const Cell& o) const { return row == o.row && col == o.col; }
  bool operator!=(const Cell& o) const { return !(*this == o); }
};

/// Grid world with blocked cells, a goal in the bottom-right region and two
/// passage cells ("crossings") that split start cells into two route
/// families. Episodes start at a random open cell of the top row; rewards
/// are -1 per move and +10 for the move that reaches the goal.
///
/// The default layout keeps the two crossings on structurally separate
/// corridors: a vertical wall splits the board into a left chamber whose only
/// exit is the upper crossing and a right chamber whose only exit is the
/// lower crossing, with the bottom row joining both to the goal:
///
///      col  0  1  2  3  4  5
///   row 0   .  .  #  .  .  .     <- start cells
///   row 1   U  #  #  .  .  .
///   row 2   .  .  #  .  .  .
///   row 3   .  .  #  .  .  .
///   row 4   .  .  #  #  L  #
///   row 5   .  .  .  .  .  G
struct MazeSpec {
  int rows = 6;
  int cols = 6;
  std::vector<Cell> walls;
  Cell goal{5, 5};
  Cell upper_crossing{1, 0};
  Cell lower_crossing{4, 4};
  int max_episode_steps = 60;

  static MazeSpec defaultSpec();

  bool inBounds(Cell c) const {
    return c.row >= 0 && c.row < rows && c.col >= 0 && c.col < cols;
  }
  bool blockedCell(Cell c) const;
  int cellIndex(Cell c) const { return c.row * cols + c.col; }

  /// Checks the structural invariants: dimensions positive, goal and
  /// crossings open and in bounds, goal reachable from every open top-row
  /// cell, each crossing on the canonical shortest path of at least one
  /// start. Throws std::invalid_argument naming the violated condition.
  void validate() const;
};

/// Actions are Up/Down/Left/Right; moves into walls or out of bounds leave
/// the agent in place (still costing the step).
enum MazeAction { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };
constexpr int kMazeActionCount = 4;

struct MazeStepResult {
  Cell next;
  double reward = 0.0;
  bool atGoal = false;
};

MazeStepResult mazeStep(const MazeSpec& spec, Cell state, int action);

/// Breadth-first distance (in moves) from every open cell to the goal;
/// -1 for walls and unreachable cells. Indexed by MazeSpec::cellIndex.
std::vector<int> bfsDistanceToGoal(const MazeSpec& spec);

/// Action that strictly decreases the BFS distance, ties broken in the fixed
/// order Up, Down, Left, Right so guided behavior is deterministic.
int bfsGreedyAction(const MazeSpec& spec, const std::vector<int>& dist, Cell c);

std::vector<Cell> openTopRowCells(const MazeSpec& spec);

/// Canonical shortest path (greedy descent on BFS distance) from a start to
/// the goal, start and goal cells included.
std::vector<Cell> canonicalPath(const MazeSpec& spec, Cell start);

/// True when the canonical path from this start passes the lower crossing;
/// such starts receive guided (expert) data during collection.
bool startIsGuided(const MazeSpec& spec, Cell start);

/// Union of canonical-path cells over all guided starts. Rollout cells
/// outside this set are the "unguided" side of every comparison.
std::vector<bool> guidedRouteMask(const MazeSpec& spec);

enum class MazeDatasetMode { kMixed, kGuidedOnly, kRandomOnly };

struct EpisodeSummary {
  std::int64_t episode = 0;
  std::string route;  // "guided" or "unguided"
  double ret = 0.0;
  int length = 0;
};

struct MazeDataset {
  std::vector<data::Transition> transitions;
  std::vector<EpisodeSummary> episodes;
};

/// Offline data collection. In kMixed mode episodes alternate between the two
/// route families: guided episodes start at a random guided-family top cell
/// and follow the canonical shortest path; unguided episodes start at a
/// random unguided-family top cell and move uniformly at random, switching to
/// guided behavior only if they ever stand on the lower crossing. kGuidedOnly
/// follows the canonical path from every start family; kRandomOnly moves
/// uniformly at random from every start family.
MazeDataset collectMazeDataset(const MazeSpec& spec, int n_episodes,
                               MazeDatasetMode mode, numkit::Rng& rng);

/// EnvModel adapter: raw state (row, col), observation one-hot over cells.
class MazeEnv : public EnvModel {
 public:
  explicit MazeEnv(MazeSpec spec);

  const MazeSpec& spec() const { return spec_; }

  int rawStateDim() const override { return 2; }
  int obsDim() const override { return spec_.rows * spec_.cols; }
  const ActionSpace& actions() const override { return actions_; }
  int maxEpisodeSteps() const override { return spec_.max_episode_steps; }

  numkit::Vec sampleInitial(numkit::Rng& rng) const override;
  void transition(const numkit::Vec& s, const numkit::Vec& a, numkit::Vec* next,
                  double* reward, bool* atTerminal) const override;
  void encodeObsInto(const numkit::Vec& s,
                     Eigen::Ref<numkit::Vec> out) const override;

  static Cell toCell(const numkit::Vec& s);
  static numkit::Vec fromCell(Cell c);

 private:
  MazeSpec spec_;
  ActionSpace actions_;
  std::vector<Cell> starts_;
};

}  // namespace envs
}  // namespace famo2o
