#include "famo2o/data/stats.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "famo2o/util/format.hpp"

namespace famo2o {
namespace data {

std::map<std::int64_t, double> trajectoryReturns(const std::vector<Transition>& ts) {
  std::map<std::int64_t, double> returns;
  for (const Transition& t : ts) returns[t.episode] += t.r;
  return returns;
}

void writeReturnsCsv(const std::string& path,
                     const std::map<std::int64_t, double>& returns) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("writeReturnsCsv: cannot open: " + path);
  os << "episode,return\n";
  for (const auto& [episode, ret] : returns) {
    os << episode << ',' << util::formatDouble(ret) << '\n';
  }
}

MeanCi meanConfidence(const std::vector<double>& xs) {
  MeanCi out;
  out.n = xs.size();
  if (xs.empty()) return out;
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.mean = sum / static_cast<double>(xs.size());
  if (xs.size() < 2) return out;
  double ss = 0.0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  out.halfWidth = 1.96 * sd / std::sqrt(static_cast<double>(xs.size()));
  return out;
}

}  // namespace data
}  // namespace famo2o
