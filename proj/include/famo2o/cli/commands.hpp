#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "famo2o/cli/config.hpp"
#include "famo2o/envs/env.hpp"

namespace famo2o {
namespace cli {

/// Instantiates the environment named by the configuration with its default
/// desk-scale parameters.
std::unique_ptr<envs::EnvModel> makeEnv(const RunConfig& cfg);

/// Parses `path`, applies "section.key=value" overrides in order, resolves
/// the run configuration and, when `seedOverride` is non-null, replaces the
/// training seed. Throws ConfigError on any problem.
RunConfig loadRunConfig(const std::string& path,
                        const std::vector<std::string>& overrides,
                        const std::uint64_t* seedOverride);

/// Rebuilds the exact run configuration recorded in a run's manifest.json,
/// so any run can be replayed bit-for-bit from its manifest alone.
RunConfig loadRunConfigFromManifest(const std::string& manifestPath);

/// FNV-1a 64-bit content hash; used to fingerprint every written artifact in
/// manifest.json so replayed runs can be compared byte-for-byte.
std::uint64_t fnv1aBytes(const std::string& bytes);
std::uint64_t fnv1aFile(const std::string& path);

/// Subcommand drivers. Each creates `outDir`, writes its artifacts plus a
/// manifest.json there, prints a short summary to stdout and returns the
/// process exit code (0 on success, 1 when a certification fails).
int runCollect(const RunConfig& cfg, const std::string& outDir);
int runTrain(const RunConfig& cfg, const std::string& outDir);
int runEval(const RunConfig& cfg, const std::string& modelsPath,
            const std::string& outDir);
int runOracle(int instances, const std::vector<double>& epsilons,
              std::uint64_t seed, const std::string& outDir);
int runAnalyze(const RunConfig& cfg, const std::string& modelsPath,
               const std::string& baselinePath, double baselineBeta,
               const std::string& outDir);

}  // namespace cli
}  // namespace famo2o
