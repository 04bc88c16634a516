#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "famo2o/cli/commands.hpp"

namespace cli = famo2o::cli;

namespace {

struct CommonArgs {
  std::string config;
  std::string out = "out";
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  CLI::Option* seedOpt = nullptr;
};

void addCommon(CLI::App* sub, CommonArgs* args) {
  sub->add_option("--config", args->config, "INI configuration file")->required();
  sub->add_option("--out", args->out, "output directory (default: out)");
  sub->add_option("--override", args->overrides,
                  "section.key=value applied on top of the file; repeatable");
  args->seedOpt = sub->add_option("--seed", args->seed, "replaces train.seed");
}

cli::RunConfig resolve(const CommonArgs& args) {
  const bool seedSet = args.seedOpt != nullptr && args.seedOpt->count() > 0;
  cli::RunConfig cfg = cli::loadRunConfig(args.config, args.overrides,
                                          seedSet ? &args.seed : nullptr);
  for (const std::string& w : cfg.warnings) std::cerr << "warning: " << w << "\n";
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Offline-to-online reinforcement learning with a state-conditional "
               "balance coefficient"};
  app.require_subcommand(1);

  CommonArgs collectArgs, trainArgs, evalArgs, analyzeArgs;
  std::string evalModels, analyzeModels, analyzeBaseline;
  double baselineBeta = 2.0;
  int oracleInstances = 25;
  std::vector<double> oracleEps;
  std::uint64_t oracleSeed = 7;
  std::string oracleOut = "out";

  CLI::App* collect = app.add_subcommand("collect", "Generate an offline dataset");
  addCommon(collect, &collectArgs);

  CLI::App* train =
      app.add_subcommand("train", "Offline pretraining followed by online fine-tuning");
  addCommon(train, &trainArgs);

  CLI::App* evalCmd = app.add_subcommand("eval", "Evaluate a saved model checkpoint");
  addCommon(evalCmd, &evalArgs);
  evalCmd->add_option("--models", evalModels, "checkpoint produced by train")
      ->required();

  CLI::App* oracleCmd = app.add_subcommand(
      "oracle", "Certify the per-state coefficient optimality properties");
  oracleCmd->add_option("--instances", oracleInstances,
                        "random instances per budget (default 25)");
  oracleCmd->add_option("--eps", oracleEps,
                        "aggregate divergence budgets (default 0.02 0.05 0.1 0.2)");
  oracleCmd->add_option("--seed", oracleSeed, "instance generator seed (default 7)");
  oracleCmd->add_option("--out", oracleOut, "output directory (default: out)");

  CLI::App* analyze = app.add_subcommand(
      "analyze", "Coefficient maps and trajectory comparisons against a baseline");
  addCommon(analyze, &analyzeArgs);
  analyze->add_option("--models", analyzeModels, "adaptive checkpoint")->required();
  analyze->add_option("--baseline", analyzeBaseline, "fixed-coefficient checkpoint")
      ->required();
  analyze->add_option("--baseline-beta", baselineBeta,
                      "coefficient the baseline was trained at (default 2)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);  // --help and friends
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (collect->parsed())
      return cli::runCollect(resolve(collectArgs), collectArgs.out);
    if (train->parsed()) return cli::runTrain(resolve(trainArgs), trainArgs.out);
    if (evalCmd->parsed())
      return cli::runEval(resolve(evalArgs), evalModels, evalArgs.out);
    if (oracleCmd->parsed()) {
      if (oracleEps.empty()) oracleEps = {0.02, 0.05, 0.1, 0.2};
      return cli::runOracle(oracleInstances, oracleEps, oracleSeed, oracleOut);
    }
    if (analyze->parsed())
      return cli::runAnalyze(resolve(analyzeArgs), analyzeModels, analyzeBaseline,
                             baselineBeta, analyzeArgs.out);
  } catch (const cli::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
