#include "famo2o/cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace famo2o {
namespace cli {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string stripComment(const std::string& line) {
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '#' || line[i] == ';') return line.substr(0, i);
  }
  return line;
}

double parseDouble(const std::string& field, const std::string& raw) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(raw, &pos);
    if (pos != raw.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(field, "not a number: '" + raw + "'");
  }
}

long parseLong(const std::string& field, const std::string& raw) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(raw, &pos);
    if (pos != raw.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(field, "not an integer: '" + raw + "'");
  }
}

bool parseBool(const std::string& field, const std::string& raw) {
  if (raw == "true" || raw == "1" || raw == "yes") return true;
  if (raw == "false" || raw == "0" || raw == "no") return false;
  throw ConfigError(field, "not a boolean: '" + raw + "'");
}

std::vector<numkit::Index> parseHidden(const std::string& field,
                                       const std::string& raw) {
  std::vector<numkit::Index> dims;
  std::stringstream ss(raw);
  std::string part;
  while (std::getline(ss, part, ',')) {
    part = trim(part);
    if (part.empty()) throw ConfigError(field, "empty layer size");
    const long v = parseLong(field, part);
    if (v <= 0) throw ConfigError(field, "layer sizes must be positive");
    dims.push_back(static_cast<numkit::Index>(v));
  }
  if (dims.empty()) throw ConfigError(field, "needs at least one layer size");
  return dims;
}

}  // namespace

IniFile IniFile::parse(std::istream& in, const std::string& name) {
  IniFile ini;
  std::string line;
  std::string section;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    line = trim(stripComment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(name, "unterminated section header at line " +
                                    std::to_string(lineNo));
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError(name, "empty section name at line " +
                                    std::to_string(lineNo));
      ini.sections[section];  // section may stay empty
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(name, "expected key = value at line " +
                                  std::to_string(lineNo));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(name, "empty key at line " + std::to_string(lineNo));
    if (section.empty())
      throw ConfigError(name, "key '" + key + "' outside any section at line " +
                                  std::to_string(lineNo));
    ini.sections[section][key] = value;
    ini.present.insert(section + "." + key);
  }
  return ini;
}

IniFile IniFile::parseFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open config file");
  return parse(in, path);
}

bool IniFile::has(const std::string& section, const std::string& key) const {
  const auto it = sections.find(section);
  return it != sections.end() && it->second.count(key) > 0;
}

const std::string& IniFile::get(const std::string& section,
                                const std::string& key) const {
  return sections.at(section).at(key);
}

void IniFile::applyOverride(const std::string& spec) {
  const std::size_t eq = spec.find('=');
  const std::size_t dot = spec.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq)
    throw ConfigError(spec, "override must look like section.key=value");
  const std::string section = trim(spec.substr(0, dot));
  const std::string key = trim(spec.substr(dot + 1, eq - dot - 1));
  const std::string value = trim(spec.substr(eq + 1));
  if (section.empty() || key.empty())
    throw ConfigError(spec, "override must look like section.key=value");
  sections[section][key] = value;
  present.insert(section + "." + key);
}

namespace {

struct KeyTracker {
  const IniFile& ini;
  std::set<std::string> consumed;

  bool use(const std::string& section, const std::string& key) {
    consumed.insert(section + "." + key);
    return ini.has(section, key);
  }
  std::string value(const std::string& section, const std::string& key) {
    return ini.get(section, key);
  }
};

}  // namespace

RunConfig RunConfig::fromIni(const IniFile& ini) {
  RunConfig cfg;
  KeyTracker keys{ini, {}};

  if (keys.use("env", "name")) cfg.env_name = keys.value("env", "name");
  if (cfg.env_name != "maze" && cfg.env_name != "pointmass")
    throw ConfigError("env.name", "unknown environment '" + cfg.env_name + "'");

  core::TrainConfig& t = cfg.train;
  if (keys.use("train", "algo")) {
    const std::string a = keys.value("train", "algo");
    if (a == "iql") t.algo = core::Algo::kIql;
    else if (a == "awac") t.algo = core::Algo::kAwac;
    else if (a == "cql") t.algo = core::Algo::kCql;
    else throw ConfigError("train.algo", "unknown algorithm '" + a + "'");
  }
  if (keys.use("train", "selector")) {
    const std::string s = keys.value("train", "selector");
    if (s == "balance") t.selector = core::Selector::kBalance;
    else if (s == "fixed") t.selector = core::Selector::kFixed;
    else if (s == "random") t.selector = core::Selector::kRandom;
    else if (s == "anneal") t.selector = core::Selector::kAnneal;
    else throw ConfigError("train.selector", "unknown selector '" + s + "'");
  }
  if (keys.use("train", "fixed_beta"))
    t.fixed_beta = parseDouble("train.fixed_beta", keys.value("train", "fixed_beta"));
  if (keys.use("train", "beta_min"))
    t.space.beta_min = parseDouble("train.beta_min", keys.value("train", "beta_min"));
  if (keys.use("train", "beta_max"))
    t.space.beta_max = parseDouble("train.beta_max", keys.value("train", "beta_max"));
  if (keys.use("train", "enc_dim"))
    t.space.enc_dim =
        static_cast<int>(parseLong("train.enc_dim", keys.value("train", "enc_dim")));
  if (keys.use("train", "normalize_encoding"))
    t.space.normalize = parseBool("train.normalize_encoding",
                                  keys.value("train", "normalize_encoding"));
  if (keys.use("train", "hidden"))
    t.hidden = parseHidden("train.hidden", keys.value("train", "hidden"));
  if (keys.use("train", "lr"))
    t.lr = parseDouble("train.lr", keys.value("train", "lr"));
  if (keys.use("train", "gamma"))
    t.gamma = parseDouble("train.gamma", keys.value("train", "gamma"));
  const bool tauExplicit = keys.use("train", "expectile_tau");
  if (tauExplicit)
    t.expectile_tau =
        parseDouble("train.expectile_tau", keys.value("train", "expectile_tau"));
  if (keys.use("train", "target_rho"))
    t.target_rho = parseDouble("train.target_rho", keys.value("train", "target_rho"));
  if (keys.use("train", "weight_cap"))
    t.weight_cap = parseDouble("train.weight_cap", keys.value("train", "weight_cap"));
  if (keys.use("train", "policy_samples"))
    t.policy_samples = static_cast<int>(
        parseLong("train.policy_samples", keys.value("train", "policy_samples")));
  if (keys.use("train", "cql_uniform_samples"))
    t.cql_uniform_samples = static_cast<int>(parseLong(
        "train.cql_uniform_samples", keys.value("train", "cql_uniform_samples")));
  if (keys.use("train", "cql_policy_samples"))
    t.cql_policy_samples = static_cast<int>(parseLong(
        "train.cql_policy_samples", keys.value("train", "cql_policy_samples")));
  if (keys.use("train", "alpha_cql"))
    t.alpha_cql = parseDouble("train.alpha_cql", keys.value("train", "alpha_cql"));
  if (keys.use("train", "batch_size"))
    t.batch_size = static_cast<int>(
        parseLong("train.batch_size", keys.value("train", "batch_size")));
  if (keys.use("train", "offline_steps"))
    t.offline_steps =
        parseLong("train.offline_steps", keys.value("train", "offline_steps"));
  if (keys.use("train", "online_steps"))
    t.online_steps =
        parseLong("train.online_steps", keys.value("train", "online_steps"));
  if (keys.use("train", "balance_update_freq"))
    t.balance_update_freq = static_cast<int>(parseLong(
        "train.balance_update_freq", keys.value("train", "balance_update_freq")));
  if (keys.use("train", "balance_sample_mean"))
    t.balance_sample_mean = parseBool("train.balance_sample_mean",
                                      keys.value("train", "balance_sample_mean"));
  if (keys.use("train", "buffer_capacity"))
    t.buffer_capacity = static_cast<std::size_t>(parseLong(
        "train.buffer_capacity", keys.value("train", "buffer_capacity")));
  if (keys.use("train", "log_every"))
    t.log_every = parseLong("train.log_every", keys.value("train", "log_every"));
  if (keys.use("train", "seed"))
    t.seed = static_cast<std::uint64_t>(
        parseLong("train.seed", keys.value("train", "seed")));
  if (keys.use("train", "record_offline_beta"))
    t.record_offline_beta = parseBool("train.record_offline_beta",
                                      keys.value("train", "record_offline_beta"));
  if (keys.use("train", "data")) cfg.data_path = keys.value("train", "data");
  if (keys.use("train", "eval_episodes"))
    cfg.eval_episodes = static_cast<int>(
        parseLong("train.eval_episodes", keys.value("train", "eval_episodes")));

  if (keys.use("collect", "episodes"))
    cfg.collect_episodes = static_cast<int>(
        parseLong("collect.episodes", keys.value("collect", "episodes")));
  if (keys.use("collect", "mode")) {
    cfg.collect_mode = keys.value("collect", "mode");
    if (cfg.collect_mode != "mixed" && cfg.collect_mode != "guided" &&
        cfg.collect_mode != "random")
      throw ConfigError("collect.mode", "unknown mode '" + cfg.collect_mode + "'");
  }

  // Reject anything the schema does not know; a typo silently falling back to
  // a default is worse than an error.
  for (const std::string& k : ini.present) {
    if (keys.consumed.count(k) == 0)
      throw ConfigError(k, "unknown configuration key");
  }

  // Cross-field checks.
  if (!(t.space.beta_min < t.space.beta_max))
    throw ConfigError("train.beta_min",
                      "beta_min must be strictly below beta_max");
  if (t.algo == core::Algo::kCql && tauExplicit)
    throw ConfigError("train.expectile_tau",
                      "expectile regression is not part of the conservative "
                      "update; remove this key");
  if (t.space.beta_max > 20.0)
    cfg.warnings.push_back(
        "train.beta_max above 20 saturates the advantage weighting for most "
        "batches; weights will sit at the cap");
  if (t.selector == core::Selector::kFixed &&
      (t.fixed_beta < t.space.beta_min || t.fixed_beta > t.space.beta_max))
    throw ConfigError("train.fixed_beta",
                      "fixed coefficient lies outside [beta_min, beta_max]");
  if (cfg.collect_episodes < 1)
    throw ConfigError("collect.episodes", "must be positive");
  if (cfg.eval_episodes < 1)
    throw ConfigError("train.eval_episodes", "must be positive");

  try {
    t.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("train", e.what());
  }
  return cfg;
}

}  // namespace cli
}  // namespace famo2o
