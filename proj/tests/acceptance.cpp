// Acceptance gate for the desk-scale build. Each numbered check prints one
// [PASS] line; the first failure prints [FAIL] with the offending values and
// exits non-zero. The first argument selects a group so the harness can run
// and time the expensive experiments separately:
//
//   prop1 | prop2 | gradients | mechanics | maze | cql | determinism | all

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "famo2o/analysis/analysis.hpp"
#include "famo2o/cli/commands.hpp"
#include "famo2o/core/trainer.hpp"
#include "famo2o/core/updates.hpp"
#include "famo2o/envs/finite_mdp.hpp"
#include "famo2o/envs/maze.hpp"
#include "famo2o/envs/pointmass.hpp"
#include "famo2o/numkit/heads.hpp"
#include "famo2o/oracle/certify.hpp"
#include "famo2o/oracle/constrained.hpp"
#include "test_support.hpp"

namespace {

#define REQUIRE(cond, msg)                                                      \
    do {                                                                        \
        if (!(cond)) {                                                          \
            std::cerr << "[FAIL] " << __FILE__ << ":" << __LINE__ << " " << msg \
                      << "\n";                                                  \
            std::exit(1);                                                       \
        }                                                                       \
    } while (0)

using famo2o::numkit::Index;
using famo2o::numkit::Mat;
using famo2o::numkit::Mlp;
using famo2o::numkit::Rng;
using famo2o::numkit::Row;
using famo2o::numkit::Vec;
namespace core = famo2o::core;
namespace algos = famo2o::algos;
namespace envs = famo2o::envs;
namespace oracle = famo2o::oracle;
namespace analysis = famo2o::analysis;
namespace cli = famo2o::cli;

double secondsSince(std::chrono::steady_clock::time_point t0) {
    const auto dt = std::chrono::steady_clock::now() - t0;
    return std::chrono::duration<double>(dt).count();
}

bool bitIdentical(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) return false;
    return std::memcmp(a.data(), b.data(), sizeof(double) * std::size_t(a.size())) == 0;
}

// ---------------------------------------------------------------------------
// Check 1: per-state budgets can match any aggregate-budget optimum, and a
// constructed two-state instance shows a strict win for per-state
// temperatures under equal budgets.

void checkBudgetMatching() {
    const auto t0 = std::chrono::steady_clock::now();
    const oracle::CertificationReport rep =
        oracle::certifyPropositions(100, {0.01, 0.1, 0.5}, 20260817ull);
    REQUIRE(rep.cases.size() == 300,
            "expected 300 certification cases, got " << rep.cases.size());
    for (const oracle::CertificationCase& c : rep.cases) {
        REQUIRE(c.prop1.j_pointwise_matched >= c.prop1.j_distributional - 1e-9,
                "matched per-state objective fell short: "
                    << c.prop1.j_pointwise_matched << " < "
                    << c.prop1.j_distributional << " at eps=" << c.eps);
        REQUIRE(c.prop1.holds && c.prop1.allocation_consistent,
                "certification case flagged itself at eps=" << c.eps);
    }
    const double margin =
        rep.constructed.j_adaptive_uniform - rep.constructed.j_agnostic_uniform;
    REQUIRE(rep.constructed.strict_improvement && margin >= 1e-6,
            "constructed instance must beat the best shared temperature by >= 1e-6, got "
                << margin);
    const double secs = secondsSince(t0);
    REQUIRE(secs < 60.0, "budget-matching sweep too slow: " << secs << " s");
    std::cout << "[PASS] check 1: per-state budgets matched the aggregate optimum in "
              << rep.cases.size() << "/300 cases; constructed instance improves by "
              << margin << " (" << secs << " s)\n";
}

// ---------------------------------------------------------------------------
// Check 2: the bisection solution per state equals the exponential-tilt
// closed form, and an independent simplex grid search finds nothing better.

double klToBehavior(const Vec& p, const Vec& b) {
    double kl = 0.0;
    for (Index i = 0; i < p.size(); ++i) {
        if (p(i) > 0.0) kl += p(i) * std::log(p(i) / b(i));
    }
    return kl;
}

void checkClosedForm() {
    const auto t0 = std::chrono::steady_clock::now();
    // Grids per action count, sized to at least 10^4 points.
    std::vector<std::vector<Vec>> grids(5);
    for (int k = 2; k <= 4; ++k) {
        grids[std::size_t(k)] =
            testsupport::simplexGrid(k, testsupport::simplexGridResolution(k, 10000));
        REQUIRE(grids[std::size_t(k)].size() >= 10000,
                "grid for " << k << " actions has only " << grids[std::size_t(k)].size()
                            << " points");
    }

    Rng rng(7401);
    double worstL1 = 0.0;
    double worstGridGap = -1e9;
    for (int inst = 0; inst < 100; ++inst) {
        const int S = int(2 + rng.uniformInt(0, 3));
        const int A = int(2 + rng.uniformInt(0, 2));
        const envs::FiniteMdp mdp = envs::randomFiniteMdp(S, A, 0.9, rng);
        const Mat adv = oracle::behaviorAdvantages(mdp);
        Vec eps(S);
        for (int s = 0; s < S; ++s) eps(s) = rng.uniform(0.01, 0.5);

        const oracle::Prop2Report r2 = oracle::verifyProp2(mdp, adv, eps);
        REQUIRE(r2.holds && r2.max_l1_gap < 1e-6,
                "closed-form gap too large on instance " << inst << ": l1="
                    << r2.max_l1_gap << " klviol=" << r2.max_kl_violation);
        worstL1 = std::max(worstL1, r2.max_l1_gap);

        // Independent brute force: nothing on the simplex grid that respects
        // the budget may beat the solver by more than the tolerance.
        const oracle::ConstrainedSolution sol = oracle::solvePointwise(mdp, adv, eps);
        for (int s = 0; s < S; ++s) {
            const Vec advRow = adv.row(s).transpose();
            const Vec behaviorRow = mdp.behavior.row(s).transpose();
            const double solObj = sol.states[std::size_t(s)].policy.dot(advRow);
            double bestGrid = -1e300;
            for (const Vec& p : grids[std::size_t(A)]) {
                if (klToBehavior(p, behaviorRow) > eps(s)) continue;
                bestGrid = std::max(bestGrid, p.dot(advRow));
            }
            REQUIRE(bestGrid > -1e300, "no feasible grid point at state " << s);
            const double gap = bestGrid - solObj;
            worstGridGap = std::max(worstGridGap, gap);
            REQUIRE(gap <= 1e-3,
                    "grid search beat the bisection at instance " << inst << " state "
                        << s << " by " << gap);
        }
    }
    const double secs = secondsSince(t0);
    REQUIRE(secs < 120.0, "closed-form sweep too slow: " << secs << " s");
    std::cout << "[PASS] check 2: closed form matched on 100/100 instances (worst L1 "
              << worstL1 << "), grid search confirms optimality (worst gap "
              << worstGridGap << ") (" << secs << " s)\n";
}

// ---------------------------------------------------------------------------
// Check 3: every training loss agrees with central finite differences on 20
// random small-network instances each.

constexpr double kFdTol = 1e-4;
const famo2o::numkit::BalanceSpace kSmallSpace{1.0, 5.0, 4, false};

struct GradFamily {
    std::string name;
    double worst = 0.0;

    void record(double rel) { worst = std::max(worst, rel); }
};

// Margin guard: resample an instance whenever a clamped quantity sits within
// `margin` of its clamp boundary, so finite differences never straddle a kink.
bool logStdRowsInterior(const Mat& out, Index firstLogStdRow, double margin) {
    for (Index r = firstLogStdRow; r < out.rows(); ++r) {
        for (Index c = 0; c < out.cols(); ++c) {
            const double v = out(r, c);
            if (v < famo2o::numkit::gaussian::kLogStdMin + margin ||
                v > famo2o::numkit::gaussian::kLogStdMax - margin)
                return false;
        }
    }
    return true;
}

Mat randomObs(Index dim, Index batch, Rng& rng) {
    Mat m(dim, batch);
    for (Index j = 0; j < batch; ++j)
        for (Index i = 0; i < dim; ++i) m(i, j) = rng.normal();
    return m;
}

Row randomRow(Index n, double lo, double hi, Rng& rng) {
    Row r(n);
    for (Index i = 0; i < n; ++i) r(i) = rng.uniform(lo, hi);
    return r;
}

void checkGradients() {
    const auto t0 = std::chrono::steady_clock::now();
    const Index B = 5;
    const int obsDim = 3;
    const std::vector<Index> hidden{8};
    std::vector<GradFamily> families;

    // Weighted log-likelihood, softmax head.
    {
        GradFamily fam{"imitation log-likelihood (softmax)"};
        for (int inst = 0; inst < 20; ++inst) {
            Rng rng(4100 + 37ull * std::uint64_t(inst));
            core::UniversalModel u =
                core::UniversalModel::discrete(obsDim, hidden, 3, kSmallSpace, rng);
            const Mat obs = randomObs(obsDim, B, rng);
            Mat act(1, B);
            for (Index j = 0; j < B; ++j) act(0, j) = double(rng.uniformInt(0, 2));
            const Row beta = randomRow(B, 1.0, 5.0, rng);
            const Row w = randomRow(B, 0.2, 3.0, rng);

            Mlp::Gradients g;
            core::weightedLogLikelihoodWithGrad(u, obs, act, beta, w, &g);
            const Vec analytic = Mlp::flattenGradients(g);
            const Vec fd = testsupport::fdGradient(u.trunk, [&] {
                return core::weightedLogLikelihood(u, obs, act, beta, w);
            });
            const double rel = testsupport::gradientRelError(analytic, fd);
            REQUIRE(rel <= kFdTol, fam.name << " instance " << inst
                                            << " rel error " << rel);
            fam.record(rel);
        }
        families.push_back(fam);
    }

    // Weighted log-likelihood, squashed-Gaussian head.
    {
        GradFamily fam{"imitation log-likelihood (squashed)"};
        const Vec center = Vec::Zero(2);
        const Vec half = Vec::Constant(2, 0.5);
        for (int inst = 0; inst < 20; ++inst) {
            for (int attempt = 0;; ++attempt) {
                REQUIRE(attempt < 50, fam.name << ": no interior instance found");
                Rng rng(4300 + 37ull * std::uint64_t(inst) + 1009ull * std::uint64_t(attempt));
                core::UniversalModel u = core::UniversalModel::box(
                    obsDim, hidden, center, half, kSmallSpace, rng);
                const Mat obs = randomObs(obsDim, B, rng);
                Mat act(2, B);
                for (Index j = 0; j < B; ++j)
                    for (Index i = 0; i < 2; ++i) act(i, j) = rng.uniform(-0.45, 0.45);
                const Row beta = randomRow(B, 1.0, 5.0, rng);
                const Row w = randomRow(B, 0.2, 3.0, rng);

                Mlp::Workspace ws;
                const Mat out = u.trunk.forward(u.inputBatch(obs, beta), ws);
                if (!logStdRowsInterior(out, 2, 0.05)) continue;

                Mlp::Gradients g;
                core::weightedLogLikelihoodWithGrad(u, obs, act, beta, w, &g);
                const Vec analytic = Mlp::flattenGradients(g);
                const Vec fd = testsupport::fdGradient(u.trunk, [&] {
                    return core::weightedLogLikelihood(u, obs, act, beta, w);
                });
                const double rel = testsupport::gradientRelError(analytic, fd);
                REQUIRE(rel <= kFdTol, fam.name << " instance " << inst
                                                << " rel error " << rel);
                fam.record(rel);
                break;
            }
        }
        families.push_back(fam);
    }

    // Balance objective, softmax head (exact expectation over actions).
    {
        GradFamily fam{"balance objective (softmax)"};
        for (int inst = 0; inst < 20; ++inst) {
            for (int attempt = 0;; ++attempt) {
                REQUIRE(attempt < 50, fam.name << ": no interior instance found");
                Rng rng(4500 + 37ull * std::uint64_t(inst) + 1009ull * std::uint64_t(attempt));
                core::UniversalModel u =
                    core::UniversalModel::discrete(obsDim, hidden, 3, kSmallSpace, rng);
                core::BalanceModel b =
                    core::BalanceModel::make(obsDim, hidden, kSmallSpace, rng);
                algos::QNetwork q = algos::QNetwork::discrete(obsDim, hidden, 3, rng);
                const Mat obs = randomObs(obsDim, B, rng);
                Row noiseBeta(B);
                for (Index j = 0; j < B; ++j) noiseBeta(j) = rng.normal();
                const Mat noiseAct = Mat::Zero(0, B);

                Mlp::Workspace ws;
                const Mat outB = b.trunk.forward(obs, ws);
                if (!logStdRowsInterior(outB, 1, 0.05)) continue;

                Mlp::Gradients g;
                core::balanceObjectiveWithGrad(b, u, q, obs, noiseBeta, noiseAct, &g);
                const Vec analytic = Mlp::flattenGradients(g);
                const Vec fd = testsupport::fdGradient(b.trunk, [&] {
                    return core::balanceObjective(b, u, q, obs, noiseBeta, noiseAct);
                });
                const double rel = testsupport::gradientRelError(analytic, fd);
                REQUIRE(rel <= kFdTol, fam.name << " instance " << inst
                                                << " rel error " << rel);
                fam.record(rel);
                break;
            }
        }
        families.push_back(fam);
    }

    // Balance objective, squashed head (action reparameterized too).
    {
        GradFamily fam{"balance objective (squashed)"};
        const Vec center = Vec::Zero(2);
        const Vec half = Vec::Constant(2, 0.5);
        for (int inst = 0; inst < 20; ++inst) {
            for (int attempt = 0;; ++attempt) {
                REQUIRE(attempt < 50, fam.name << ": no interior instance found");
                Rng rng(4700 + 37ull * std::uint64_t(inst) + 1009ull * std::uint64_t(attempt));
                core::UniversalModel u = core::UniversalModel::box(
                    obsDim, hidden, center, half, kSmallSpace, rng);
                core::BalanceModel b =
                    core::BalanceModel::make(obsDim, hidden, kSmallSpace, rng);
                algos::QNetwork q = algos::QNetwork::box(obsDim, hidden, 2, rng);
                const Mat obs = randomObs(obsDim, B, rng);
                Row noiseBeta(B);
                for (Index j = 0; j < B; ++j) noiseBeta(j) = rng.normal();
                const Mat noiseAct = randomObs(2, B, rng);

                Mlp::Workspace wsB;
                const Mat outB = b.trunk.forward(obs, wsB);
                if (!logStdRowsInterior(outB, 1, 0.05)) continue;
                // The universal head's log-std must be interior too: beta
                // changes as the balance net is perturbed, moving those rows.
                Row betaRow(B);
                for (Index j = 0; j < B; ++j)
                    betaRow(j) = b.betaFromLatent(outB(0, j) +
                                                  std::exp(outB(1, j)) * noiseBeta(j));
                Mlp::Workspace wsU;
                const Mat outU = u.trunk.forward(u.inputBatch(obs, betaRow), wsU);
                if (!logStdRowsInterior(outU, 2, 0.05)) continue;

                Mlp::Gradients g;
                core::balanceObjectiveWithGrad(b, u, q, obs, noiseBeta, noiseAct, &g);
                const Vec analytic = Mlp::flattenGradients(g);
                const Vec fd = testsupport::fdGradient(b.trunk, [&] {
                    return core::balanceObjective(b, u, q, obs, noiseBeta, noiseAct);
                });
                const double rel = testsupport::gradientRelError(analytic, fd);
                REQUIRE(rel <= kFdTol, fam.name << " instance " << inst
                                                << " rel error " << rel);
                fam.record(rel);
                break;
            }
        }
        families.push_back(fam);
    }

    // Expectile value regression (kink guarded by a residual margin).
    {
        GradFamily fam{"expectile regression"};
        for (int inst = 0; inst < 20; ++inst) {
            for (int attempt = 0;; ++attempt) {
                REQUIRE(attempt < 50, fam.name << ": no interior instance found");
                Rng rng(4900 + 37ull * std::uint64_t(inst) + 1009ull * std::uint64_t(attempt));
                algos::VNetwork v = algos::VNetwork::make(obsDim, hidden, rng);
                const Mat obs = randomObs(obsDim, B, rng);
                const Row qData = randomRow(B, -2.0, 2.0, rng);
                const Row pred = v.values(obs);
                bool interior = true;
                for (Index j = 0; j < B; ++j)
                    if (std::abs(qData(j) - pred(j)) < 1e-3) interior = false;
                if (!interior) continue;

                Mlp::Gradients g;
                algos::expectileLossWithGrad(v, obs, qData, 0.7, &g);
                const Vec analytic = Mlp::flattenGradients(g);
                const Vec fd = testsupport::fdGradient(v.net, [&] {
                    return algos::expectileLoss(v, obs, qData, 0.7);
                });
                const double rel = testsupport::gradientRelError(analytic, fd);
                REQUIRE(rel <= kFdTol, fam.name << " instance " << inst
                                                << " rel error " << rel);
                fam.record(rel);
                break;
            }
        }
        families.push_back(fam);
    }

    // Temporal-difference regression, both critic layouts.
    for (const bool box : {false, true}) {
        GradFamily fam{box ? std::string("td regression (box)")
                           : std::string("td regression (discrete)")};
        for (int inst = 0; inst < 20; ++inst) {
            Rng rng(5100 + (box ? 7000ull : 0ull) + 37ull * std::uint64_t(inst));
            algos::QNetwork q = box ? algos::QNetwork::box(obsDim, hidden, 2, rng)
                                    : algos::QNetwork::discrete(obsDim, hidden, 3, rng);
            const Mat obs = randomObs(obsDim, B, rng);
            Mat act;
            if (box) {
                act = Mat(2, B);
                for (Index j = 0; j < B; ++j)
                    for (Index i = 0; i < 2; ++i) act(i, j) = rng.uniform(-0.45, 0.45);
            } else {
                act = Mat(1, B);
                for (Index j = 0; j < B; ++j) act(0, j) = double(rng.uniformInt(0, 2));
            }
            const Row targets = randomRow(B, -2.0, 2.0, rng);

            Mlp::Gradients g;
            algos::tdLossWithGrad(q, obs, act, targets, &g);
            const Vec analytic = Mlp::flattenGradients(g);
            const Vec fd = testsupport::fdGradient(q.net, [&] {
                return algos::tdLoss(q, obs, act, targets);
            });
            const double rel = testsupport::gradientRelError(analytic, fd);
            REQUIRE(rel <= kFdTol, fam.name << " instance " << inst << " rel error "
                                            << rel);
            fam.record(rel);
        }
        families.push_back(fam);
    }

    // Conservative critic penalty on top of the TD loss, both layouts.
    for (const bool box : {false, true}) {
        GradFamily fam{box ? std::string("conservative critic loss (box)")
                           : std::string("conservative critic loss (discrete)")};
        for (int inst = 0; inst < 20; ++inst) {
            Rng rng(5300 + (box ? 7000ull : 0ull) + 37ull * std::uint64_t(inst));
            algos::QNetwork q = box ? algos::QNetwork::box(obsDim, hidden, 2, rng)
                                    : algos::QNetwork::discrete(obsDim, hidden, 3, rng);
            const Mat obs = randomObs(obsDim, B, rng);
            Mat act;
            Mat sampled(0, 0);
            if (box) {
                act = Mat(2, B);
                for (Index j = 0; j < B; ++j)
                    for (Index i = 0; i < 2; ++i) act(i, j) = rng.uniform(-0.45, 0.45);
                sampled = Mat(2, B * 3);
                for (Index j = 0; j < sampled.cols(); ++j)
                    for (Index i = 0; i < 2; ++i) sampled(i, j) = rng.uniform(-0.45, 0.45);
            } else {
                act = Mat(1, B);
                for (Index j = 0; j < B; ++j) act(0, j) = double(rng.uniformInt(0, 2));
            }
            const Row targets = randomRow(B, -2.0, 2.0, rng);
            const double alpha = rng.uniform(0.5, 1.5);

            Mlp::Gradients g;
            algos::cqlQLossWithGrad(q, obs, act, targets, sampled, alpha, &g);
            const Vec analytic = Mlp::flattenGradients(g);
            const Vec fd = testsupport::fdGradient(q.net, [&] {
                return algos::cqlQLoss(q, obs, act, targets, sampled, alpha);
            });
            const double rel = testsupport::gradientRelError(analytic, fd);
            REQUIRE(rel <= kFdTol, fam.name << " instance " << inst << " rel error "
                                            << rel);
            fam.record(rel);
        }
        families.push_back(fam);
    }

    // Conservative policy objective (entropy-regularized critic ascent).
    for (const bool box : {false, true}) {
        GradFamily fam{box ? std::string("conservative policy objective (box)")
                           : std::string("conservative policy objective (discrete)")};
        for (int inst = 0; inst < 20; ++inst) {
            for (int attempt = 0;; ++attempt) {
                REQUIRE(attempt < 50, fam.name << ": no interior instance found");
                Rng rng(5500 + (box ? 7000ull : 0ull) + 37ull * std::uint64_t(inst) +
                        1009ull * std::uint64_t(attempt));
                const Vec center = Vec::Zero(2);
                const Vec half = Vec::Constant(2, 0.5);
                core::UniversalModel u =
                    box ? core::UniversalModel::box(obsDim, hidden, center, half,
                                                    kSmallSpace, rng)
                        : core::UniversalModel::discrete(obsDim, hidden, 3, kSmallSpace,
                                                         rng);
                algos::QNetwork q = box ? algos::QNetwork::box(obsDim, hidden, 2, rng)
                                        : algos::QNetwork::discrete(obsDim, hidden, 3, rng);
                const Mat obs = randomObs(obsDim, B, rng);
                const Row alpha = randomRow(B, 0.5, 1.5, rng);
                const Mat noiseAct = box ? randomObs(2, B, rng) : Mat::Zero(0, B);

                if (box) {
                    Mlp::Workspace ws;
                    const Mat out = u.trunk.forward(u.inputBatch(obs, alpha), ws);
                    if (!logStdRowsInterior(out, 2, 0.05)) continue;
                }

                Mlp::Gradients g;
                core::conservativePolicyObjectiveWithGrad(u, q, obs, alpha, noiseAct, &g);
                const Vec analytic = Mlp::flattenGradients(g);
                const Vec fd = testsupport::fdGradient(u.trunk, [&] {
                    return core::conservativePolicyObjective(u, q, obs, alpha, noiseAct);
                });
                const double rel = testsupport::gradientRelError(analytic, fd);
                REQUIRE(rel <= kFdTol, fam.name << " instance " << inst
                                                << " rel error " << rel);
                fam.record(rel);
                break;
            }
        }
        families.push_back(fam);
    }

    double worst = 0.0;
    for (const GradFamily& fam : families) {
        std::cout << "  - " << fam.name << ": 20/20 instances, worst rel error "
                  << fam.worst << "\n";
        worst = std::max(worst, fam.worst);
    }
    std::cout << "[PASS] check 3: every training loss matches central finite "
                 "differences (h=1e-5) within rel 1e-4; worst observed "
              << worst << " (" << secondsSince(t0) << " s)\n";
}

// ---------------------------------------------------------------------------
// Check 4: coefficient-stream mechanics. Offline coefficients are uniform on
// the space; online coefficients stay inside it; freezing the space collapses
// the adaptive trainer onto the fixed-coefficient one bit for bit.

void checkCoefficientMechanics() {
    const auto t0 = std::chrono::steady_clock::now();
    const envs::MazeSpec spec = envs::MazeSpec::defaultSpec();
    Rng collectRng(6101);
    const envs::MazeDataset ds =
        envs::collectMazeDataset(spec, 80, envs::MazeDatasetMode::kMixed, collectRng);

    // (a) Offline coefficient draws are uniform over the space.
    {
        envs::MazeEnv env(spec);
        core::TrainConfig cfg;
        cfg.algo = core::Algo::kIql;
        cfg.selector = core::Selector::kBalance;
        cfg.hidden = {32, 32};
        cfg.offline_steps = 160;
        cfg.online_steps = 0;
        cfg.record_offline_beta = true;
        cfg.seed = 6102;
        core::Trainer tr(env, cfg);
        tr.loadDataset(ds.transitions);
        tr.runOffline();
        const std::vector<double>& log = tr.offlineBetaLog();
        REQUIRE(log.size() >= 10000,
                "need >= 10^4 offline coefficient draws, got " << log.size());
        const double p = testsupport::ksUniformPValue(log, cfg.space.beta_min,
                                                      cfg.space.beta_max);
        REQUIRE(p > 0.01, "offline coefficients failed the KS uniformity test, p="
                              << p << " over " << log.size() << " draws");
        std::cout << "  - offline draws uniform: KS p=" << p << " over " << log.size()
                  << " draws\n";
    }

    // (b) Every interaction coefficient stays inside the space.
    {
        envs::MazeEnv env(spec);
        core::TrainConfig cfg;
        cfg.algo = core::Algo::kIql;
        cfg.selector = core::Selector::kBalance;
        cfg.hidden = {32, 32};
        cfg.offline_steps = 200;
        cfg.online_steps = 800;
        cfg.seed = 6103;
        core::Trainer tr(env, cfg);
        tr.loadDataset(ds.transitions);
        tr.runOffline();
        tr.runOnline();
        const std::vector<double>& log = tr.onlineBetaLog();
        REQUIRE(log.size() == 800, "expected one logged coefficient per online step");
        for (const double b : log)
            REQUIRE(b >= cfg.space.beta_min && b <= cfg.space.beta_max,
                    "online coefficient escaped the space: " << b);
        std::cout << "  - online coefficients inside [" << cfg.space.beta_min << ", "
                  << cfg.space.beta_max << "] for all " << log.size() << " steps\n";
    }

    // (c) Degenerate space (frozen coefficient) reproduces the fixed-selector
    // run bit for bit on every value network, over the full offline+online run.
    {
        const double frozen = 2.5;
        core::TrainConfig base;
        base.algo = core::Algo::kIql;
        base.hidden = {32, 32};
        base.batch_size = 32;
        base.offline_steps = 300;
        base.online_steps = 300;
        base.seed = 6104;

        core::TrainConfig cfgA = base;
        cfgA.selector = core::Selector::kBalance;
        cfgA.space.beta_min = frozen;
        cfgA.space.beta_max = frozen;

        core::TrainConfig cfgB = base;
        cfgB.selector = core::Selector::kFixed;
        cfgB.fixed_beta = frozen;

        envs::MazeEnv envA(spec);
        core::Trainer trA(envA, cfgA);
        trA.loadDataset(ds.transitions);
        trA.runOffline();
        trA.runOnline();

        envs::MazeEnv envB(spec);
        core::Trainer trB(envB, cfgB);
        trB.loadDataset(ds.transitions);
        trB.runOffline();
        trB.runOnline();

        REQUIRE(bitIdentical(trA.vNet().net.flatten(), trB.vNet().net.flatten()),
                "state-value networks diverged under a frozen coefficient");
        REQUIRE(bitIdentical(trA.qNet().net.flatten(), trB.qNet().net.flatten()),
                "critics diverged under a frozen coefficient");
        REQUIRE(bitIdentical(trA.qTargetNet().net.flatten(),
                             trB.qTargetNet().net.flatten()),
                "target critics diverged under a frozen coefficient");
        REQUIRE(bitIdentical(trA.universal().trunk.flatten(),
                             trB.universal().trunk.flatten()),
                "conditional policies diverged under a frozen coefficient");
        std::cout << "  - frozen coefficient " << frozen
                  << ": value updates bit-identical to the fixed selector over "
                  << (base.offline_steps + base.online_steps) << " steps\n";
    }

    std::cout << "[PASS] check 4: coefficient mechanics (uniform offline draws, "
                 "bounded online draws, frozen-space bit identity) ("
              << secondsSince(t0) << " s)\n";
}

// ---------------------------------------------------------------------------
// Checks 5-7: the grid-world adaptivity experiment. 35 full training runs
// shared across three checks.

struct MazeRunResult {
    double evalMean = 0.0;
    analysis::BetaStats onlineBeta;
    analysis::MazeBetaMap map;  // only filled for adaptive runs
    bool hasMap = false;
};

MazeRunResult runMazeTraining(const std::vector<famo2o::data::Transition>& ts,
                              std::uint64_t seed, core::Selector selector,
                              double fixedBeta, bool wantMap) {
    const envs::MazeSpec spec = envs::MazeSpec::defaultSpec();
    envs::MazeEnv env(spec);
    core::TrainConfig cfg;
    cfg.algo = core::Algo::kIql;
    cfg.selector = selector;
    cfg.fixed_beta = fixedBeta;
    cfg.seed = seed;
    core::Trainer tr(env, cfg);
    tr.loadDataset(ts);
    tr.runOffline();
    tr.runOnline();

    MazeRunResult r;
    r.evalMean = tr.evaluate(20).ret.mean;
    r.onlineBeta = analysis::betaStatistics(tr.onlineBetaLog());
    if (wantMap) {
        r.map = analysis::mazeBetaMap(env, tr.universal(), tr.balance());
        r.hasMap = true;
    }
    return r;
}

void checkMazeAdaptivity() {
    const envs::MazeSpec spec = envs::MazeSpec::defaultSpec();
    const std::vector<std::uint64_t> seeds{11, 12, 13, 14, 15};

    Rng rngMixed(7001), rngGuided(7002), rngRandom(7003);
    const envs::MazeDataset dsMixed =
        envs::collectMazeDataset(spec, 400, envs::MazeDatasetMode::kMixed, rngMixed);
    const envs::MazeDataset dsGuided = envs::collectMazeDataset(
        spec, 400, envs::MazeDatasetMode::kGuidedOnly, rngGuided);
    const envs::MazeDataset dsRandom = envs::collectMazeDataset(
        spec, 400, envs::MazeDatasetMode::kRandomOnly, rngRandom);

    // Check 5: adaptive runs on the mixed dataset, timed as a block.
    const auto t5 = std::chrono::steady_clock::now();
    std::vector<MazeRunResult> adaptive;
    for (const std::uint64_t s : seeds)
        adaptive.push_back(runMazeTraining(dsMixed.transitions, s,
                                           core::Selector::kBalance, 0.0, true));
    const double secs5 = secondsSince(t5);
    int mapWins = 0;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        const analysis::MazeBetaMap& m = adaptive[i].map;
        const bool win = m.mean_guided < m.mean_unguided;
        mapWins += win ? 1 : 0;
        std::cout << "  - seed " << seeds[i] << ": guided-route mean coefficient "
                  << m.mean_guided << " (" << m.guided_visits << " visits) vs "
                  << m.mean_unguided << " elsewhere (" << m.unguided_visits
                  << " visits)" << (win ? "" : "  [inverted]") << "\n";
    }
    REQUIRE(mapWins >= 4, "guided-route coefficients were lower in only "
                              << mapWins << "/5 seeds");
    REQUIRE(secs5 < 600.0,
            "adaptive training block exceeded its budget: " << secs5 << " s");
    std::cout << "[PASS] check 5: guided-route cells get lower coefficients than "
                 "the rest in "
              << mapWins << "/5 seeds (" << secs5 << " s for 5 runs)\n";

    // Check 6: spread and level of the interaction coefficients track data
    // quality. Adaptive runs on single-quality datasets for comparison.
    const auto t6 = std::chrono::steady_clock::now();
    std::vector<MazeRunResult> guidedOnly, randomOnly;
    for (const std::uint64_t s : seeds) {
        guidedOnly.push_back(runMazeTraining(dsGuided.transitions, s,
                                             core::Selector::kBalance, 0.0, false));
        randomOnly.push_back(runMazeTraining(dsRandom.transitions, s,
                                             core::Selector::kBalance, 0.0, false));
    }
    int spreadWins = 0, levelWins = 0;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        const bool spread =
            adaptive[i].onlineBeta.stddev > guidedOnly[i].onlineBeta.stddev;
        const bool level =
            guidedOnly[i].onlineBeta.mean < randomOnly[i].onlineBeta.mean;
        spreadWins += spread ? 1 : 0;
        levelWins += level ? 1 : 0;
        std::cout << "  - seed " << seeds[i] << ": std mixed "
                  << adaptive[i].onlineBeta.stddev << " vs guided-only "
                  << guidedOnly[i].onlineBeta.stddev << "; mean guided-only "
                  << guidedOnly[i].onlineBeta.mean << " vs random-only "
                  << randomOnly[i].onlineBeta.mean << "\n";
    }
    REQUIRE(spreadWins >= 4, "mixed-data coefficient spread won only "
                                 << spreadWins << "/5 seeds");
    REQUIRE(levelWins >= 4, "guided-only coefficients were below random-only in only "
                                << levelWins << "/5 seeds");
    std::cout << "[PASS] check 6: coefficient spread (mixed > guided-only, "
              << spreadWins << "/5) and level (guided-only < random-only, "
              << levelWins << "/5) track data quality (" << secondsSince(t6)
              << " s for 10 runs)\n";

    // Check 7: adaptive coefficients are competitive with the fixed sweep and
    // beat the random selector seed by seed.
    const auto t7 = std::chrono::steady_clock::now();
    const double betaMid = 0.5 * (core::TrainConfig{}.space.beta_min +
                                  core::TrainConfig{}.space.beta_max);
    const std::vector<double> sweep{core::TrainConfig{}.space.beta_min, betaMid,
                                    core::TrainConfig{}.space.beta_max};
    std::vector<double> sweepMeans;
    for (const double beta : sweep) {
        double acc = 0.0;
        for (const std::uint64_t s : seeds)
            acc += runMazeTraining(dsMixed.transitions, s, core::Selector::kFixed,
                                   beta, false)
                       .evalMean;
        sweepMeans.push_back(acc / double(seeds.size()));
    }
    std::vector<double> randomSel;
    for (const std::uint64_t s : seeds)
        randomSel.push_back(runMazeTraining(dsMixed.transitions, s,
                                            core::Selector::kRandom, 0.0, false)
                                .evalMean);

    double adaptiveMean = 0.0;
    for (const MazeRunResult& r : adaptive) adaptiveMean += r.evalMean;
    adaptiveMean /= double(adaptive.size());
    const double sweepMean =
        (sweepMeans[0] + sweepMeans[1] + sweepMeans[2]) / 3.0;
    double lo = adaptiveMean, hi = adaptiveMean;
    for (const double m : sweepMeans) {
        lo = std::min(lo, m);
        hi = std::max(hi, m);
    }
    const double range = hi - lo;
    int pairedWins = 0;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        const bool win = adaptive[i].evalMean >= randomSel[i];
        pairedWins += win ? 1 : 0;
        std::cout << "  - seed " << seeds[i] << ": adaptive return "
                  << adaptive[i].evalMean << " vs random selector " << randomSel[i]
                  << (win ? "" : "  [lost]") << "\n";
    }
    std::cout << "  - sweep means at {" << sweep[0] << ", " << sweep[1] << ", "
              << sweep[2] << "}: " << sweepMeans[0] << ", " << sweepMeans[1] << ", "
              << sweepMeans[2] << "; adaptive mean " << adaptiveMean << "; range "
              << range << "\n";
    REQUIRE(adaptiveMean >= sweepMean - 0.05 * range,
            "adaptive mean return " << adaptiveMean
                                    << " fell below the sweep mean " << sweepMean
                                    << " - 5% of range " << range);
    REQUIRE(pairedWins >= 4, "adaptive beat the random selector in only "
                                 << pairedWins << "/5 seeds");
    std::cout << "[PASS] check 7: adaptive return " << adaptiveMean
              << " >= sweep mean " << sweepMean << " - 5% range, and beats the "
                 "random selector in "
              << pairedWins << "/5 seeds (" << secondsSince(t7) << " s for 20 runs)\n";
}

// ---------------------------------------------------------------------------
// Check 8: the conservative base update trains on the point mass without
// numeric failure and closes at least half the gap to the straight-line
// policy, on all three seeds.

void checkConservativePointmass() {
    const auto t0 = std::chrono::steady_clock::now();
    const envs::PointMassSpec spec;
    Rng collectRng(7101);
    const envs::PointMassDataset ds = envs::collectPointmassDataset(spec, 200, collectRng);

    // Straight-line reference return over its own evaluation episodes.
    double greedyMean = 0.0;
    {
        envs::PointMassEnv env(spec);
        Rng rng(7102);
        envs::EpisodeDriver driver(env);
        const int episodes = 40;
        for (int e = 0; e < episodes; ++e) {
            driver.reset(rng);
            double ret = 0.0;
            while (driver.active()) {
                const famo2o::envs::StepOutcome out =
                    driver.step(envs::pointmassGreedyAction(spec, driver.state()));
                ret += out.reward;
            }
            greedyMean += ret;
        }
        greedyMean /= double(episodes);
    }

    const std::vector<std::uint64_t> seeds{21, 22, 23};
    for (const std::uint64_t seed : seeds) {
        envs::PointMassEnv env(spec);
        core::TrainConfig cfg;
        cfg.algo = core::Algo::kCql;
        cfg.selector = core::Selector::kBalance;
        cfg.space.beta_min = 0.5;
        cfg.space.beta_max = 1.5;
        cfg.offline_steps = 5000;
        cfg.online_steps = 5000;
        cfg.seed = seed;
        core::Trainer tr(env, cfg);
        tr.loadDataset(ds.transitions);

        const double untrained = tr.evaluate(20).ret.mean;
        tr.runOffline();
        tr.runOnline();
        const double trained = tr.evaluate(20).ret.mean;

        for (const core::MetricsRow& row : tr.metrics()) {
            REQUIRE(std::isfinite(row.q_loss) && std::isfinite(row.universal_obj) &&
                        std::isfinite(row.balance_obj),
                    "non-finite metric at step " << row.step);
        }
        const double gap = greedyMean - untrained;
        REQUIRE(gap > 0.0, "straight-line reference failed to beat the untrained "
                           "policy: greedy " << greedyMean << " untrained " << untrained);
        const bool ok = trained >= untrained + 0.5 * gap;
        std::cout << "  - seed " << seed << ": untrained " << untrained
                  << ", trained " << trained << ", straight-line " << greedyMean
                  << (ok ? "" : "  [short]") << "\n";
        REQUIRE(ok, "seed " << seed << " closed less than half the gap: trained "
                            << trained << " untrained " << untrained
                            << " straight-line " << greedyMean);
    }
    std::cout << "[PASS] check 8: conservative updates train the point mass "
                 "through all steps and close >= 50% of the straight-line gap "
                 "on 3/3 seeds ("
              << secondsSince(t0) << " s)\n";
}

// ---------------------------------------------------------------------------
// Check 9: a training run replayed from its manifest reproduces metrics.csv
// byte for byte.

void checkDeterminism() {
    const auto t0 = std::chrono::steady_clock::now();
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / "famo2o_acceptance_replay";
    fs::remove_all(root);
    fs::create_directories(root);

    cli::RunConfig collectCfg;
    collectCfg.env_name = "maze";
    collectCfg.collect_episodes = 40;
    collectCfg.collect_mode = "mixed";
    collectCfg.train.seed = 909;
    const std::string dataDir = (root / "data").string();
    REQUIRE(cli::runCollect(collectCfg, dataDir) == 0, "collect step failed");

    cli::RunConfig trainCfg = collectCfg;
    trainCfg.data_path = (fs::path(dataDir) / "dataset.jsonl").string();
    trainCfg.train.hidden = {32, 32};
    trainCfg.train.offline_steps = 300;
    trainCfg.train.online_steps = 300;
    trainCfg.train.log_every = 100;
    trainCfg.eval_episodes = 4;
    const std::string dirA = (root / "runA").string();
    REQUIRE(cli::runTrain(trainCfg, dirA) == 0, "training run failed");

    // Replay purely from the manifest.
    const cli::RunConfig replayCfg =
        cli::loadRunConfigFromManifest((fs::path(dirA) / "manifest.json").string());
    const std::string dirB = (root / "runB").string();
    REQUIRE(cli::runTrain(replayCfg, dirB) == 0, "replayed training run failed");

    const std::string metricsA =
        testsupport::readFileBytes((fs::path(dirA) / "metrics.csv").string());
    const std::string metricsB =
        testsupport::readFileBytes((fs::path(dirB) / "metrics.csv").string());
    REQUIRE(metricsA == metricsB,
            "metrics.csv differs between the run and its manifest replay ("
                << metricsA.size() << " vs " << metricsB.size() << " bytes)");

    const std::string modelsA =
        testsupport::readFileBytes((fs::path(dirA) / "models.bin").string());
    const std::string modelsB =
        testsupport::readFileBytes((fs::path(dirB) / "models.bin").string());
    REQUIRE(modelsA == modelsB, "checkpoints differ between run and replay");

    // The manifest's recorded hash must match the artifact on disk.
    std::ifstream min((fs::path(dirA) / "manifest.json").string());
    nlohmann::json manifest;
    min >> manifest;
    std::ostringstream expected;
    expected << "0x" << std::hex << std::setw(16) << std::setfill('0')
             << cli::fnv1aBytes(metricsA);
    REQUIRE(manifest.at("artifacts").at("metrics.csv").at("fnv1a").get<std::string>() ==
                expected.str(),
            "manifest hash does not match metrics.csv on disk");

    std::cout << "[PASS] check 9: manifest replay reproduces metrics.csv ("
              << metricsA.size() << " bytes) and the checkpoint byte-identically ("
              << secondsSince(t0) << " s)\n";
}

}  // namespace

int main(int argc, char** argv) {
    const std::string group = argc > 1 ? argv[1] : "all";
    try {
        bool known = false;
        if (group == "prop1" || group == "all") { checkBudgetMatching(); known = true; }
        if (group == "prop2" || group == "all") { checkClosedForm(); known = true; }
        if (group == "gradients" || group == "all") { checkGradients(); known = true; }
        if (group == "mechanics" || group == "all") { checkCoefficientMechanics(); known = true; }
        if (group == "maze" || group == "all") { checkMazeAdaptivity(); known = true; }
        if (group == "cql" || group == "all") { checkConservativePointmass(); known = true; }
        if (group == "determinism" || group == "all") { checkDeterminism(); known = true; }
        if (!known) {
            std::cerr << "unknown acceptance group '" << group
                      << "' (expected prop1|prop2|gradients|mechanics|maze|cql|"
                         "determinism|all)\n";
            return 2;
        }
    } catch (const std::exception& e) {
        std::cerr << "[FAIL] unhandled exception: " << e.what() << "\n";
        return 1;
    }
    std::cout << "acceptance group '" << group << "': all checks passed\n";
    return 0;
}
