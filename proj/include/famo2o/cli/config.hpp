#pragma once

#include <istream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "famo2o/core/trainer.hpp"

namespace famo2o {
namespace cli {

/// Configuration problem tied to a named field ("section.key"); callers map
/// these to the validation exit code.
struct ConfigError : std::runtime_error {
  std::string field;
  ConfigError(std::string fieldName, const std::string& what)
      : std::runtime_error("config field '" + fieldName + "': " + what),
        field(std::move(fieldName)) {}
};

/// Minimal INI reader: [section] headers, key = value pairs, '#' or ';'
/// comments. Keeps the set of keys that were literally present so validation
/// can tell an explicit setting apart from a default.
struct IniFile {
  std::map<std::string, std::map<std::string, std::string>> sections;
  std::set<std::string> present;  // "section.key"

  static IniFile parse(std::istream& in, const std::string& name);
  static IniFile parseFile(const std::string& path);

  bool has(const std::string& section, const std::string& key) const;
  const std::string& get(const std::string& section, const std::string& key) const;

  /// Applies "section.key=value"; throws ConfigError on a malformed spec.
  void applyOverride(const std::string& spec);
};

/// Fully resolved run configuration: environment choice, training setup and
/// collection parameters, with defaults for everything absent from the file.
struct RunConfig {
  std::string env_name = "maze";
  core::TrainConfig train;
  std::string data_path;  // dataset consumed by train / produced by collect
  int collect_episodes = 200;
  std::string collect_mode = "mixed";  // mixed | guided | random (grid env)
  int eval_episodes = 10;
  std::vector<std::string> warnings;  // non-fatal findings from validation

  /// Builds and validates; throws ConfigError naming the offending field.
  static RunConfig fromIni(const IniFile& ini);
};

}  // namespace cli
}  // namespace famo2o
