#include "famo2o/analysis/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>

#include "famo2o/core/updates.hpp"
#include "famo2o/data/stats.hpp"
#include "famo2o/util/format.hpp"

namespace famo2o {
namespace analysis {

using numkit::Index;
using numkit::Mat;
using numkit::Row;
using numkit::Vec;

Row rawImitationWeights(const Row& beta, const Row& q, const Row& v,
                        long* overflowCount) {
  if (beta.size() != q.size() || q.size() != v.size())
    throw std::invalid_argument("rawImitationWeights: size mismatch");
  Row w(beta.size());
  for (Index i = 0; i < beta.size(); ++i) {
    w(i) = std::exp(beta(i) * (q(i) - v(i)));
    if (std::isinf(w(i)) && overflowCount != nullptr) ++*overflowCount;
  }
  return w;
}

namespace {

Vec gridDisplacement(int action) {
  Vec d(2);
  switch (action) {
    case envs::kUp: d << -1.0, 0.0; break;
    case envs::kDown: d << 1.0, 0.0; break;
    case envs::kLeft: d << 0.0, -1.0; break;
    case envs::kRight: d << 0.0, 1.0; break;
    default:
      throw std::invalid_argument("actionDistanceSquared: unknown grid action");
  }
  return d;
}

}  // namespace

double actionDistanceSquared(const Vec& a, const Vec& b, envs::ActionKind kind) {
  if (kind == envs::ActionKind::kDiscrete) {
    if (a.size() != 1 || b.size() != 1)
      throw std::invalid_argument("actionDistanceSquared: grid actions are 1-vectors");
    const Vec da = gridDisplacement(static_cast<int>(a(0)));
    const Vec db = gridDisplacement(static_cast<int>(b(0)));
    return (da - db).squaredNorm();
  }
  if (a.size() != b.size())
    throw std::invalid_argument("actionDistanceSquared: dim mismatch");
  return (a - b).squaredNorm();
}

BetaStats betaStatistics(const std::vector<double>& xs) {
  if (xs.empty()) throw std::invalid_argument("betaStatistics: empty sample");
  BetaStats s;
  s.n = xs.size();
  s.min = xs.front();
  s.max = xs.front();
  double sum = 0.0;
  for (double x : xs) {
    sum += x;
    s.min = std::min(s.min, x);
    s.max = std::max(s.max, x);
  }
  s.mean = sum / static_cast<double>(s.n);
  double sq = 0.0;
  for (double x : xs) sq += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(sq / static_cast<double>(s.n));
  return s;
}

MazeBetaMap mazeBetaMap(const envs::MazeEnv& env, const core::UniversalModel& u,
                        const core::BalanceModel& b) {
  const envs::MazeSpec& spec = env.spec();
  MazeBetaMap map;
  Mat sums = Mat::Zero(spec.rows, spec.cols);
  map.visits = numkit::MatX<int>::Zero(spec.rows, spec.cols);

  for (envs::Cell start : envs::openTopRowCells(spec)) {
    envs::Cell c = start;
    for (int t = 0; t < spec.max_episode_steps; ++t) {
      const Vec obs = env.encodeObs(envs::MazeEnv::fromCell(c));
      const double beta = b.meanBeta(obs);
      sums(c.row, c.col) += beta;
      map.visits(c.row, c.col) += 1;
      const int action = static_cast<int>(u.modeAction(obs, beta)(0));
      const envs::MazeStepResult out = envs::mazeStep(spec, c, action);
      c = out.next;
      if (out.atGoal) break;
    }
  }

  map.mean_beta = Mat::Constant(spec.rows, spec.cols,
                                std::numeric_limits<double>::quiet_NaN());
  const std::vector<bool> guided = envs::guidedRouteMask(spec);
  double guidedSum = 0.0, unguidedSum = 0.0;
  for (int r = 0; r < spec.rows; ++r) {
    for (int col = 0; col < spec.cols; ++col) {
      const int n = map.visits(r, col);
      if (n == 0) continue;
      map.mean_beta(r, col) = sums(r, col) / n;
      const bool g = guided[spec.cellIndex(envs::Cell{r, col})];
      if (g) {
        guidedSum += sums(r, col);
        map.guided_visits += n;
      } else {
        unguidedSum += sums(r, col);
        map.unguided_visits += n;
      }
    }
  }
  map.mean_guided = map.guided_visits > 0
                        ? guidedSum / static_cast<double>(map.guided_visits)
                        : std::numeric_limits<double>::quiet_NaN();
  map.mean_unguided = map.unguided_visits > 0
                          ? unguidedSum / static_cast<double>(map.unguided_visits)
                          : std::numeric_limits<double>::quiet_NaN();
  return map;
}

void writeBetaMapCsv(const std::string& path, const MazeBetaMap& map) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open beta-map file: " + path);
  out << "row,col,visits,mean_beta\n";
  for (Index r = 0; r < map.mean_beta.rows(); ++r) {
    for (Index c = 0; c < map.mean_beta.cols(); ++c) {
      out << r << ',' << c << ',' << map.visits(r, c) << ',';
      if (map.visits(r, c) > 0) out << util::formatDouble(map.mean_beta(r, c));
      out << '\n';
    }
  }
}

std::vector<TrajectoryDiff> diffVsBaseline(
    const std::vector<data::Transition>& ts, const envs::EnvModel& env,
    const core::UniversalModel& adaptive,
    const core::BalanceModel& adaptiveBalance, const core::UniversalModel& baseline,
    double baselineBeta, const algos::QNetwork& qTarget, const algos::VNetwork& v,
    double weightCap) {
  if (ts.empty()) throw std::invalid_argument("diffVsBaseline: empty trajectory set");
  struct Acc {
    double wa = 0.0, wb = 0.0, dist = 0.0;
    long n = 0;
  };
  std::map<std::int64_t, Acc> acc;
  const envs::ActionKind kind = env.actions().kind;
  for (const data::Transition& t : ts) {
    const Vec obs = env.encodeObs(t.s);
    Mat obsM(obs.size(), 1);
    obsM.col(0) = obs;
    Mat actM(t.a.size(), 1);
    actM.col(0) = t.a;
    const double qd = qTarget.dataValues(obsM, actM)(0);
    const double vd = v.values(obsM)(0);
    const double betaA = adaptiveBalance.meanBeta(obs);
    Row betaRowA(1), betaRowB(1), qRow(1), vRow(1);
    betaRowA(0) = betaA;
    betaRowB(0) = baselineBeta;
    qRow(0) = qd;
    vRow(0) = vd;
    const double wa = core::imitationWeights(betaRowA, qRow, vRow, weightCap)(0);
    const double wb = core::imitationWeights(betaRowB, qRow, vRow, weightCap)(0);
    const Vec actA = adaptive.modeAction(obs, betaA);
    const Vec actB = baseline.modeAction(obs, baselineBeta);
    Acc& a = acc[t.episode];
    a.wa += wa;
    a.wb += wb;
    a.dist += actionDistanceSquared(actA, actB, kind);
    ++a.n;
  }
  const std::map<std::int64_t, double> rets = data::trajectoryReturns(ts);
  std::vector<TrajectoryDiff> rows;
  rows.reserve(acc.size());
  for (const auto& [ep, a] : acc) {
    TrajectoryDiff d;
    d.episode = ep;
    d.ret = rets.at(ep);
    d.mean_weight_adaptive = a.wa / a.n;
    d.mean_weight_baseline = a.wb / a.n;
    d.mean_action_dist = a.dist / a.n;
    rows.push_back(d);
  }
  std::sort(rows.begin(), rows.end(), [](const TrajectoryDiff& x, const TrajectoryDiff& y) {
    if (x.ret != y.ret) return x.ret < y.ret;
    return x.episode < y.episode;
  });
  return rows;
}

void writeDiffCsv(const std::string& path, const std::vector<TrajectoryDiff>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open diff file: " + path);
  out << "episode,return,mean_weight_adaptive,mean_weight_baseline,mean_action_dist\n";
  for (const TrajectoryDiff& r : rows) {
    out << r.episode << ',' << util::formatDouble(r.ret) << ','
        << util::formatDouble(r.mean_weight_adaptive) << ','
        << util::formatDouble(r.mean_weight_baseline) << ','
        << util::formatDouble(r.mean_action_dist) << '\n';
  }
}

}  // namespace analysis
}  // namespace famo2o
