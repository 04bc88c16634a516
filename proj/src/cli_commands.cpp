#include "famo2o/cli/commands.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <utility>

#include <json.hpp>

#include "famo2o/analysis/analysis.hpp"
#include "famo2o/core/trainer.hpp"
#include "famo2o/data/jsonl.hpp"
#include "famo2o/data/stats.hpp"
#include "famo2o/envs/maze.hpp"
#include "famo2o/envs/pointmass.hpp"
#include "famo2o/oracle/certify.hpp"
#include "famo2o/util/format.hpp"

namespace famo2o {
namespace cli {

namespace fs = std::filesystem;
using util::formatDouble;

namespace {

std::string joinPath(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

const char* algoName(core::Algo a) {
  switch (a) {
    case core::Algo::kIql: return "iql";
    case core::Algo::kAwac: return "awac";
    case core::Algo::kCql: return "cql";
  }
  return "?";
}

const char* selectorName(core::Selector s) {
  switch (s) {
    case core::Selector::kBalance: return "balance";
    case core::Selector::kFixed: return "fixed";
    case core::Selector::kRandom: return "random";
    case core::Selector::kAnneal: return "anneal";
  }
  return "?";
}

std::string hexHash(std::uint64_t h) {
  std::ostringstream os;
  os << "0x" << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

nlohmann::json configJson(const RunConfig& cfg) {
  const core::TrainConfig& t = cfg.train;
  nlohmann::json j;
  j["env"]["name"] = cfg.env_name;
  nlohmann::json& tr = j["train"];
  tr["algo"] = algoName(t.algo);
  tr["selector"] = selectorName(t.selector);
  tr["fixed_beta"] = t.fixed_beta;
  tr["beta_min"] = t.space.beta_min;
  tr["beta_max"] = t.space.beta_max;
  tr["enc_dim"] = t.space.enc_dim;
  tr["normalize_encoding"] = t.space.normalize;
  tr["hidden"] = t.hidden;
  tr["lr"] = t.lr;
  tr["gamma"] = t.gamma;
  tr["expectile_tau"] = t.expectile_tau;
  tr["target_rho"] = t.target_rho;
  tr["weight_cap"] = t.weight_cap;
  tr["policy_samples"] = t.policy_samples;
  tr["cql_uniform_samples"] = t.cql_uniform_samples;
  tr["cql_policy_samples"] = t.cql_policy_samples;
  tr["alpha_cql"] = t.alpha_cql;
  tr["batch_size"] = t.batch_size;
  tr["offline_steps"] = t.offline_steps;
  tr["online_steps"] = t.online_steps;
  tr["balance_update_freq"] = t.balance_update_freq;
  tr["balance_sample_mean"] = t.balance_sample_mean;
  tr["buffer_capacity"] = t.buffer_capacity;
  tr["log_every"] = t.log_every;
  tr["seed"] = t.seed;
  tr["record_offline_beta"] = t.record_offline_beta;
  tr["data"] = cfg.data_path;
  tr["eval_episodes"] = cfg.eval_episodes;
  j["collect"]["episodes"] = cfg.collect_episodes;
  j["collect"]["mode"] = cfg.collect_mode;
  return j;
}

void writeManifest(const std::string& outDir, const std::string& command,
                   std::uint64_t seed, const nlohmann::json& config,
                   const std::vector<std::pair<std::string, std::string>>& artifacts) {
  nlohmann::json j;
  j["command"] = command;
  j["seed"] = seed;
  j["desk_scale"] = true;
  j["config"] = config;
  j["artifacts"] = nlohmann::json::object();
  for (const auto& [name, path] : artifacts) {
    j["artifacts"][name] = {{"path", path}, {"fnv1a", hexHash(fnv1aFile(path))}};
  }
  std::ofstream out(joinPath(outDir, "manifest.json"));
  if (!out) throw std::runtime_error("cannot write manifest.json in " + outDir);
  out << j.dump(2) << "\n";
}

void requireDataPath(const RunConfig& cfg, const std::string& why) {
  if (cfg.data_path.empty())
    throw ConfigError("train.data", why);
}

core::Algo parseAlgoName(const std::string& a) {
  if (a == "iql") return core::Algo::kIql;
  if (a == "awac") return core::Algo::kAwac;
  if (a == "cql") return core::Algo::kCql;
  throw std::runtime_error("manifest: unknown algo '" + a + "'");
}

core::Selector parseSelectorName(const std::string& s) {
  if (s == "balance") return core::Selector::kBalance;
  if (s == "fixed") return core::Selector::kFixed;
  if (s == "random") return core::Selector::kRandom;
  if (s == "anneal") return core::Selector::kAnneal;
  throw std::runtime_error("manifest: unknown selector '" + s + "'");
}

std::string ciCell(const data::MeanCi& ci) {
  return formatDouble(ci.mean) + " +/- " + formatDouble(ci.halfWidth);
}

}  // namespace

std::unique_ptr<envs::EnvModel> makeEnv(const RunConfig& cfg) {
  if (cfg.env_name == "maze")
    return std::make_unique<envs::MazeEnv>(envs::MazeSpec::defaultSpec());
  if (cfg.env_name == "pointmass")
    return std::make_unique<envs::PointMassEnv>(envs::PointMassSpec{});
  throw ConfigError("env.name", "unknown environment '" + cfg.env_name + "'");
}

RunConfig loadRunConfig(const std::string& path,
                        const std::vector<std::string>& overrides,
                        const std::uint64_t* seedOverride) {
  IniFile ini = IniFile::parseFile(path);
  for (const std::string& o : overrides) ini.applyOverride(o);
  RunConfig cfg = RunConfig::fromIni(ini);
  if (seedOverride != nullptr) cfg.train.seed = *seedOverride;
  return cfg;
}

RunConfig loadRunConfigFromManifest(const std::string& manifestPath) {
  std::ifstream in(manifestPath);
  if (!in) throw std::runtime_error("cannot open manifest: " + manifestPath);
  nlohmann::json m;
  in >> m;
  const nlohmann::json& j = m.at("config");
  const nlohmann::json& tr = j.at("train");

  RunConfig cfg;
  cfg.env_name = j.at("env").at("name").get<std::string>();
  core::TrainConfig& t = cfg.train;
  t.algo = parseAlgoName(tr.at("algo").get<std::string>());
  t.selector = parseSelectorName(tr.at("selector").get<std::string>());
  t.fixed_beta = tr.at("fixed_beta").get<double>();
  t.space.beta_min = tr.at("beta_min").get<double>();
  t.space.beta_max = tr.at("beta_max").get<double>();
  t.space.enc_dim = tr.at("enc_dim").get<int>();
  t.space.normalize = tr.at("normalize_encoding").get<bool>();
  t.hidden = tr.at("hidden").get<std::vector<numkit::Index>>();
  t.lr = tr.at("lr").get<double>();
  t.gamma = tr.at("gamma").get<double>();
  t.expectile_tau = tr.at("expectile_tau").get<double>();
  t.target_rho = tr.at("target_rho").get<double>();
  t.weight_cap = tr.at("weight_cap").get<double>();
  t.policy_samples = tr.at("policy_samples").get<int>();
  t.cql_uniform_samples = tr.at("cql_uniform_samples").get<int>();
  t.cql_policy_samples = tr.at("cql_policy_samples").get<int>();
  t.alpha_cql = tr.at("alpha_cql").get<double>();
  t.batch_size = tr.at("batch_size").get<int>();
  t.offline_steps = tr.at("offline_steps").get<long>();
  t.online_steps = tr.at("online_steps").get<long>();
  t.balance_update_freq = tr.at("balance_update_freq").get<int>();
  t.balance_sample_mean = tr.at("balance_sample_mean").get<bool>();
  t.buffer_capacity = tr.at("buffer_capacity").get<std::size_t>();
  t.log_every = tr.at("log_every").get<long>();
  t.seed = tr.at("seed").get<std::uint64_t>();
  t.record_offline_beta = tr.at("record_offline_beta").get<bool>();
  cfg.data_path = tr.at("data").get<std::string>();
  cfg.eval_episodes = tr.at("eval_episodes").get<int>();
  cfg.collect_episodes = m.at("config").at("collect").at("episodes").get<int>();
  cfg.collect_mode = m.at("config").at("collect").at("mode").get<std::string>();
  t.validate();
  return cfg;
}

std::uint64_t fnv1aBytes(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t fnv1aFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open artifact for hashing: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return fnv1aBytes(buf.str());
}

int runCollect(const RunConfig& cfg, const std::string& outDir) {
  fs::create_directories(outDir);
  numkit::Rng rng(cfg.train.seed);

  std::vector<data::Transition> ts;
  std::vector<std::pair<std::string, std::string>> artifacts;
  const std::string dataPath = joinPath(outDir, "dataset.jsonl");

  if (cfg.env_name == "maze") {
    envs::MazeDatasetMode mode = envs::MazeDatasetMode::kMixed;
    if (cfg.collect_mode == "guided") mode = envs::MazeDatasetMode::kGuidedOnly;
    else if (cfg.collect_mode == "random") mode = envs::MazeDatasetMode::kRandomOnly;
    const envs::MazeDataset ds = envs::collectMazeDataset(
        envs::MazeSpec::defaultSpec(), cfg.collect_episodes, mode, rng);
    ts = ds.transitions;

    const std::string episodesPath = joinPath(outDir, "episodes.csv");
    std::ofstream ep(episodesPath);
    if (!ep) throw std::runtime_error("cannot write " + episodesPath);
    ep << "episode,route,return,length\n";
    for (const envs::EpisodeSummary& e : ds.episodes) {
      ep << e.episode << "," << e.route << "," << formatDouble(e.ret) << ","
         << e.length << "\n";
    }
    ep.close();
    artifacts.emplace_back("episodes.csv", episodesPath);
  } else {
    const envs::PointMassDataset ds =
        envs::collectPointmassDataset(envs::PointMassSpec{}, cfg.collect_episodes, rng);
    ts = ds.transitions;
  }

  data::saveJsonl(dataPath, ts);
  artifacts.emplace_back("dataset.jsonl", dataPath);

  const auto returns = data::trajectoryReturns(ts);
  const std::string returnsPath = joinPath(outDir, "returns.csv");
  data::writeReturnsCsv(returnsPath, returns);
  artifacts.emplace_back("returns.csv", returnsPath);

  double meanRet = 0.0;
  for (const auto& [id, r] : returns) meanRet += r;
  if (!returns.empty()) meanRet /= static_cast<double>(returns.size());

  writeManifest(outDir, "collect", cfg.train.seed, configJson(cfg), artifacts);
  std::cout << "[collect] " << ts.size() << " transitions across "
            << returns.size() << " episodes (mean return "
            << formatDouble(meanRet) << ") -> " << dataPath << "\n";
  return 0;
}

int runTrain(const RunConfig& cfg, const std::string& outDir) {
  requireDataPath(cfg, "training needs an offline dataset; point this at a "
                       "dataset.jsonl produced by collect");
  fs::create_directories(outDir);

  const std::unique_ptr<envs::EnvModel> env = makeEnv(cfg);
  const std::vector<data::Transition> ts = data::loadJsonl(cfg.data_path);

  core::Trainer trainer(*env, cfg.train);
  trainer.loadDataset(ts);

  trainer.runOffline();
  const core::EvalReport offline = trainer.evaluate(cfg.eval_episodes);
  trainer.appendEvalRow(offline);
  std::cout << "[train] offline phase done: eval return " << ciCell(offline.ret)
            << " over " << offline.returns.size() << " episodes, mean coefficient "
            << formatDouble(offline.mean_beta) << "\n";

  trainer.runOnline();
  const core::EvalReport online = trainer.evaluate(cfg.eval_episodes);
  trainer.appendEvalRow(online);
  std::cout << "[train] online phase done: eval return " << ciCell(online.ret)
            << " over " << online.returns.size() << " episodes, mean coefficient "
            << formatDouble(online.mean_beta) << "\n";

  const std::string metricsPath = joinPath(outDir, "metrics.csv");
  core::writeMetricsCsv(metricsPath, trainer.metrics());
  const std::string modelsPath = joinPath(outDir, "models.bin");
  trainer.saveModels(modelsPath);

  const std::string reportPath = joinPath(outDir, "report.md");
  {
    std::ofstream rep(reportPath);
    if (!rep) throw std::runtime_error("cannot write " + reportPath);
    rep << "# Run report\n\n";
    rep << "- environment: " << cfg.env_name << "\n";
    rep << "- algorithm: " << algoName(cfg.train.algo)
        << "; selector: " << selectorName(cfg.train.selector) << "\n";
    rep << "- seed: " << cfg.train.seed << "\n";
    rep << "- gradient steps: " << cfg.train.offline_steps << " offline + "
        << cfg.train.online_steps << " online\n";
    rep << "- dataset: " << cfg.data_path << " (" << ts.size()
        << " transitions)\n\n";
    rep << "| phase | mean return | 95% CI half-width | episodes | mean coefficient |\n";
    rep << "|-------|-------------|-------------------|----------|------------------|\n";
    rep << "| offline | " << formatDouble(offline.ret.mean) << " | "
        << formatDouble(offline.ret.halfWidth) << " | " << offline.returns.size()
        << " | " << formatDouble(offline.mean_beta) << " |\n";
    rep << "| online | " << formatDouble(online.ret.mean) << " | "
        << formatDouble(online.ret.halfWidth) << " | " << online.returns.size()
        << " | " << formatDouble(online.mean_beta) << " |\n\n";
    rep << "Artifacts: metrics.csv (per-step objectives, losses and evaluation "
           "rows), models.bin (network checkpoint), manifest.json "
           "(configuration and content hashes).\n";
  }

  writeManifest(outDir, "train", cfg.train.seed, configJson(cfg),
                {{"metrics.csv", metricsPath},
                 {"models.bin", modelsPath},
                 {"report.md", reportPath}});
  std::cout << "[train] artifacts written to " << outDir << "\n";
  return 0;
}

int runEval(const RunConfig& cfg, const std::string& modelsPath,
            const std::string& outDir) {
  fs::create_directories(outDir);
  const std::unique_ptr<envs::EnvModel> env = makeEnv(cfg);
  core::Trainer trainer(*env, cfg.train);
  trainer.loadModels(modelsPath);

  const core::EvalReport rep = trainer.evaluate(cfg.eval_episodes);
  const std::string evalPath = joinPath(outDir, "eval.csv");
  {
    std::ofstream out(evalPath);
    if (!out) throw std::runtime_error("cannot write " + evalPath);
    out << "episode,return\n";
    for (std::size_t i = 0; i < rep.returns.size(); ++i)
      out << i << "," << formatDouble(rep.returns[i]) << "\n";
  }

  writeManifest(outDir, "eval", cfg.train.seed, configJson(cfg),
                {{"eval.csv", evalPath}});
  std::cout << "[eval] return " << ciCell(rep.ret) << " over "
            << rep.returns.size() << " episodes, mean coefficient "
            << formatDouble(rep.mean_beta) << " (models: " << modelsPath << ")\n";
  return 0;
}

int runOracle(int instances, const std::vector<double>& epsilons,
              std::uint64_t seed, const std::string& outDir) {
  fs::create_directories(outDir);
  const oracle::CertificationReport report =
      oracle::certifyPropositions(instances, epsilons, seed);

  const std::string certPath = joinPath(outDir, "certification.json");
  {
    std::ofstream out(certPath);
    if (!out) throw std::runtime_error("cannot write " + certPath);
    out << report.toJson() << "\n";
  }

  int held = 0;
  for (const oracle::CertificationCase& c : report.cases)
    if (c.prop1.holds && c.prop2.holds) ++held;
  writeManifest(outDir, "oracle", seed, nlohmann::json::object(),
                {{"certification.json", certPath}});
  std::cout << "[oracle] " << held << "/" << report.cases.size()
            << " random cases hold; constructed strict-improvement case "
            << (report.constructed.strict_improvement ? "improves" : "FAILED")
            << " -> " << certPath << "\n";
  if (!report.allHold()) {
    std::cout << "[oracle] certification FAILED\n";
    return 1;
  }
  return 0;
}

int runAnalyze(const RunConfig& cfg, const std::string& modelsPath,
               const std::string& baselinePath, double baselineBeta,
               const std::string& outDir) {
  requireDataPath(cfg, "analysis compares policies along stored trajectories; "
                       "point this at the dataset used for training");
  if (baselineBeta < cfg.train.space.beta_min ||
      baselineBeta > cfg.train.space.beta_max)
    throw ConfigError("baseline-beta",
                      "baseline coefficient lies outside [beta_min, beta_max]");
  fs::create_directories(outDir);

  const std::unique_ptr<envs::EnvModel> env = makeEnv(cfg);
  const std::vector<data::Transition> ts = data::loadJsonl(cfg.data_path);

  core::Trainer adaptive(*env, cfg.train);
  adaptive.loadModels(modelsPath);

  RunConfig baseCfg = cfg;
  baseCfg.train.selector = core::Selector::kFixed;
  baseCfg.train.fixed_beta = baselineBeta;
  core::Trainer baseline(*env, baseCfg.train);
  baseline.loadModels(baselinePath);

  const std::vector<analysis::TrajectoryDiff> diff = analysis::diffVsBaseline(
      ts, *env, adaptive.universal(), adaptive.balance(), baseline.universal(),
      baselineBeta, adaptive.qTargetNet(), adaptive.vNet(), cfg.train.weight_cap);
  const std::string diffPath = joinPath(outDir, "diff.csv");
  analysis::writeDiffCsv(diffPath, diff);

  std::vector<std::pair<std::string, std::string>> artifacts{{"diff.csv", diffPath}};

  double wAdaptive = 0.0, wBaseline = 0.0, dist = 0.0;
  for (const analysis::TrajectoryDiff& d : diff) {
    wAdaptive += d.mean_weight_adaptive;
    wBaseline += d.mean_weight_baseline;
    dist += d.mean_action_dist;
  }
  if (!diff.empty()) {
    const double n = static_cast<double>(diff.size());
    wAdaptive /= n;
    wBaseline /= n;
    dist /= n;
  }

  const auto* mazeEnv = dynamic_cast<const envs::MazeEnv*>(env.get());
  analysis::MazeBetaMap map;
  if (mazeEnv != nullptr) {
    map = analysis::mazeBetaMap(*mazeEnv, adaptive.universal(), adaptive.balance());
    const std::string mapPath = joinPath(outDir, "beta_map.csv");
    analysis::writeBetaMapCsv(mapPath, map);
    artifacts.emplace_back("beta_map.csv", mapPath);
  }

  const std::string reportPath = joinPath(outDir, "report.md");
  {
    std::ofstream rep(reportPath);
    if (!rep) throw std::runtime_error("cannot write " + reportPath);
    rep << "# Analysis report\n\n";
    rep << "- environment: " << cfg.env_name << "\n";
    rep << "- adaptive models: " << modelsPath << "\n";
    rep << "- baseline models: " << baselinePath << " at fixed coefficient "
        << formatDouble(baselineBeta) << "\n";
    rep << "- trajectories compared: " << diff.size() << "\n\n";
    rep << "Mean imitation weight on logged actions (shared critic): adaptive "
        << formatDouble(wAdaptive) << " vs baseline " << formatDouble(wBaseline)
        << "; mean squared distance between greedy actions "
        << formatDouble(dist) << ".\n";
    if (cfg.train.algo != core::Algo::kIql)
      rep << "\nNote: the comparison weights advantage against the value head, "
             "which only the expectile-regression algorithm trains; treat the "
             "weight columns as indicative here.\n";
    if (mazeEnv != nullptr) {
      rep << "\n## Coefficient map\n\n";
      rep << "Deterministic rollouts from every open top-row start; per-cell "
             "mean balance coefficient in beta_map.csv.\n\n";
      rep << "- guided-route cells: mean coefficient "
          << formatDouble(map.mean_guided) << " over " << map.guided_visits
          << " visits\n";
      rep << "- other cells: mean coefficient "
          << formatDouble(map.mean_unguided) << " over " << map.unguided_visits
          << " visits\n";
    }
  }
  artifacts.emplace_back("report.md", reportPath);

  writeManifest(outDir, "analyze", cfg.train.seed, configJson(cfg), artifacts);
  std::cout << "[analyze] " << diff.size() << " trajectories compared";
  if (mazeEnv != nullptr)
    std::cout << "; coefficient map guided " << formatDouble(map.mean_guided)
              << " vs other " << formatDouble(map.mean_unguided);
  std::cout << " -> " << outDir << "\n";
  return 0;
}

}  // namespace cli
}  // namespace famo2o
