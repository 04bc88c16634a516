#include "famo2o/oracle/certify.hpp"

#include <cmath>
#include <sstream>

#include "famo2o/util/format.hpp"

namespace famo2o {
namespace oracle {

namespace {

using numkit::Mat;
using numkit::Vec;

constexpr double kHoldTol = 1e-9;
constexpr double kAllocTol = 1e-7;
constexpr double kStrictTol = 1e-6;

double advantageSpread(const Vec& advRow) {
  return advRow.maxCoeff() - advRow.minCoeff();
}

}  // namespace

Prop1Report verifyProp1(const envs::FiniteMdp& mdp, const Mat& A, double eps,
                        const BisectionConfig& cfg) {
  Prop1Report report;
  const ConstrainedSolution dist = solveDistributional(mdp, A, eps, cfg);
  report.j_distributional = dist.objective;

  // Matched budgets: give each state exactly the KL it used.
  Vec matched(mdp.n_states);
  for (int s = 0; s < mdp.n_states; ++s) matched[s] = dist.states[s].kl;
  const ConstrainedSolution pointMatched = solvePointwise(mdp, A, matched, cfg);
  report.j_pointwise_matched = pointMatched.objective;
  report.j_pointwise_improved = pointMatched.objective;

  // Reallocations: strip a fraction of every other state's budget and hand
  // the freed (visitation-weighted) budget to the widest-spread state. The
  // aggregate solve is already jointly optimal over every allocation with the
  // same weighted sum, so these probes certify solver consistency: none of
  // them may come out ahead.
  int target = 0;
  double bestSpread = -1.0;
  for (int s = 0; s < mdp.n_states; ++s) {
    const double spread = advantageSpread(A.row(s));
    if (spread > bestSpread) {
      bestSpread = spread;
      target = s;
    }
  }
  const Vec& d = dist.visitation;
  for (const double t : {0.25, 0.5, 0.75, 1.0}) {
    Vec budgets = matched;
    double freed = 0.0;
    for (int s = 0; s < mdp.n_states; ++s) {
      if (s == target) continue;
      freed += d[s] * t * matched[s];
      budgets[s] = (1.0 - t) * matched[s];
    }
    budgets[target] = matched[target] + (d[target] > 0.0 ? freed / d[target] : 0.0);
    const ConstrainedSolution sol = solvePointwise(mdp, A, budgets, cfg);
    if (sol.objective > report.j_pointwise_improved) {
      report.j_pointwise_improved = sol.objective;
    }
  }

  // Equal per-state budgets: per-state temperatures against the best single
  // shared temperature. A shared temperature must respect the tightest
  // state's constraint, so asymmetric spreads leave objective on the table.
  const Vec uniform = Vec::Constant(mdp.n_states, eps);
  const ConstrainedSolution adaptive = solvePointwise(mdp, A, uniform, cfg);
  report.j_adaptive_uniform = adaptive.objective;
  double shared = kInfiniteBeta;
  for (int s = 0; s < mdp.n_states; ++s) {
    shared = std::min(shared, adaptive.states[s].beta);
  }
  double jAgnostic = 0.0;
  for (int s = 0; s < mdp.n_states; ++s) {
    const Vec behaviorRow = mdp.behavior.row(s);
    const Vec advRow = A.row(s);
    const Vec pol = std::isinf(shared)
                        ? greedyLimitPolicy(behaviorRow, advRow)
                        : tiltedPolicy(behaviorRow, advRow, shared);
    jAgnostic += adaptive.visitation[s] * pol.dot(advRow);
  }
  report.j_agnostic_uniform = jAgnostic;

  report.holds = report.j_pointwise_matched >= report.j_distributional - kHoldTol;
  report.allocation_consistent =
      report.j_pointwise_improved <= report.j_distributional + kAllocTol;
  report.strict_improvement =
      report.j_adaptive_uniform >= report.j_agnostic_uniform + kStrictTol;
  return report;
}

Prop2Report verifyProp2(const envs::FiniteMdp& mdp, const Mat& A,
                        const Vec& epsPerState, const BisectionConfig& cfg) {
  Prop2Report report;
  const ConstrainedSolution sol = solvePointwise(mdp, A, epsPerState, cfg);
  for (int s = 0; s < mdp.n_states; ++s) {
    const StateSolution& st = sol.states[s];
    const Vec behaviorRow = mdp.behavior.row(s);
    const Vec advRow = A.row(s);
    Vec rebuilt(mdp.n_actions);
    if (std::isinf(st.beta)) {
      rebuilt = greedyLimitPolicy(behaviorRow, advRow);
      // Flat advantage rows degenerate to the behavior policy.
      if (advantageSpread(advRow) < kTieTol) rebuilt = behaviorRow;
    } else {
      // Explicit closed form at the recorded temperature and partition value.
      rebuilt = behaviorRow.array() *
                (st.beta * (advRow.array() - st.advShift) - st.logZShifted).exp();
    }
    const double l1 = (rebuilt - st.policy).cwiseAbs().sum();
    if (l1 > report.max_l1_gap) report.max_l1_gap = l1;
    const double violation = st.kl - epsPerState[s];
    if (violation > report.max_kl_violation) report.max_kl_violation = violation;
  }
  report.holds = report.max_l1_gap < 1e-6 && report.max_kl_violation <= kHoldTol;
  return report;
}

envs::FiniteMdp asymmetricTwoStateInstance() {
  envs::FiniteMdp mdp;
  mdp.n_states = 2;
  mdp.n_actions = 2;
  mdp.gamma = 0.9;
  // Action-independent uniform transitions make the advantages equal the
  // centered rewards.
  mdp.P.assign(2, Mat::Constant(2, 2, 0.5));
  mdp.R.resize(2, 2);
  mdp.R << 1.0, -1.0, 0.01, -0.01;
  mdp.behavior = Mat::Constant(2, 2, 0.5);
  mdp.validate();
  return mdp;
}

bool CertificationReport::allHold() const {
  for (const CertificationCase& c : cases) {
    if (!c.prop1.holds || !c.prop1.allocation_consistent || !c.prop2.holds)
      return false;
  }
  return constructed.holds && constructed.allocation_consistent &&
         constructed.strict_improvement;
}

std::string CertificationReport::toJson() const {
  std::ostringstream os;
  os << "{\n  \"cases\": [\n";
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const CertificationCase& c = cases[i];
    os << "    {\"n_states\": " << c.n_states << ", \"n_actions\": " << c.n_actions
       << ", \"eps\": " << util::formatDouble(c.eps)
       << ", \"prop1_holds\": " << (c.prop1.holds ? "true" : "false")
       << ", \"allocation_consistent\": "
       << (c.prop1.allocation_consistent ? "true" : "false")
       << ", \"j_distributional\": " << util::formatDouble(c.prop1.j_distributional)
       << ", \"j_pointwise_matched\": "
       << util::formatDouble(c.prop1.j_pointwise_matched)
       << ", \"j_adaptive_uniform\": "
       << util::formatDouble(c.prop1.j_adaptive_uniform)
       << ", \"j_agnostic_uniform\": "
       << util::formatDouble(c.prop1.j_agnostic_uniform)
       << ", \"prop2_holds\": " << (c.prop2.holds ? "true" : "false")
       << ", \"prop2_max_l1_gap\": " << util::formatDouble(c.prop2.max_l1_gap)
       << "}" << (i + 1 < cases.size() ? "," : "") << "\n";
  }
  os << "  ],\n";
  os << "  \"constructed_holds\": " << (constructed.holds ? "true" : "false") << ",\n";
  os << "  \"constructed_allocation_consistent\": "
     << (constructed.allocation_consistent ? "true" : "false") << ",\n";
  os << "  \"constructed_strict_improvement\": "
     << (constructed.strict_improvement ? "true" : "false") << ",\n";
  os << "  \"constructed_adaptive_gain\": "
     << util::formatDouble(constructed.j_adaptive_uniform -
                           constructed.j_agnostic_uniform)
     << ",\n";
  os << "  \"all_hold\": " << (allHold() ? "true" : "false") << "\n}";
  return os.str();
}

CertificationReport certifyPropositions(int instances,
                                        const std::vector<double>& epsilons,
                                        std::uint64_t seed) {
  CertificationReport report;
  numkit::Rng rng(seed);
  for (int i = 0; i < instances; ++i) {
    const int S = static_cast<int>(rng.uniformInt(2, 5));
    const int Aa = static_cast<int>(rng.uniformInt(2, 4));
    const double gamma = 0.9 + 0.09 * rng.uniform01();
    const envs::FiniteMdp mdp = envs::randomFiniteMdp(S, Aa, gamma, rng);
    const Mat adv = behaviorAdvantages(mdp);
    for (double eps : epsilons) {
      CertificationCase c;
      c.n_states = S;
      c.n_actions = Aa;
      c.eps = eps;
      c.prop1 = verifyProp1(mdp, adv, eps);
      Vec budgets(S);
      for (int s = 0; s < S; ++s) budgets[s] = rng.uniform(0.01, 0.5);
      c.prop2 = verifyProp2(mdp, adv, budgets);
      report.cases.push_back(c);
    }
  }
  report.constructed =
      verifyProp1(asymmetricTwoStateInstance(),
                  behaviorAdvantages(asymmetricTwoStateInstance()), 0.05);
  return report;
}

}  // namespace oracle
}  // namespace famo2o
