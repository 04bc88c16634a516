#include "famo2o/data/jsonl.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace famo2o {
namespace data {

namespace {

nlohmann::json vecToJson(const numkit::Vec& v) {
  nlohmann::json a = nlohmann::json::array();
  for (numkit::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

numkit::Vec vecFromJson(const nlohmann::json& a) {
  if (!a.is_array()) throw std::runtime_error("expected array");
  numkit::Vec v(static_cast<numkit::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<numkit::Index>(i)] = a[i].get<double>();
  return v;
}

}  // namespace

void saveJsonl(const std::string& path, const std::vector<Transition>& ts) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("saveJsonl: cannot open for write: " + path);
  for (const Transition& t : ts) {
    nlohmann::json j;
    j["episode"] = t.episode;
    j["t"] = t.t;
    j["s"] = vecToJson(t.s);
    j["a"] = vecToJson(t.a);
    j["r"] = t.r;
    j["s_next"] = vecToJson(t.s_next);
    j["done"] = t.done;
    os << j.dump() << '\n';
  }
  if (!os) throw std::runtime_error("saveJsonl: write failed: " + path);
}

std::vector<Transition> loadJsonl(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("loadJsonl: cannot open file: " + path);
  std::vector<Transition> out;
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(is, line)) {
    ++lineNo;
    if (line.empty()) continue;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      Transition t;
      t.episode = j.at("episode").get<std::int64_t>();
      t.t = j.at("t").get<int>();
      t.s = vecFromJson(j.at("s"));
      t.a = vecFromJson(j.at("a"));
      t.r = j.at("r").get<double>();
      t.s_next = vecFromJson(j.at("s_next"));
      t.done = j.at("done").get<bool>();
      out.push_back(std::move(t));
    } catch (const std::exception& e) {
      throw std::runtime_error("loadJsonl: malformed line " + std::to_string(lineNo) +
                               " in " + path + ": " + e.what());
    }
  }
  return out;
}

}  // namespace data
}  // namespace famo2o
