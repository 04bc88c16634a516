#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "famo2o/data/transition.hpp"

namespace famo2o {
namespace data {

/// Undiscounted return per episode id, ordered by id.
std::map<std::int64_t, double> trajectoryReturns(const std::vector<Transition>& ts);

/// Writes "episode,return" rows.
void writeReturnsCsv(const std::string& path,
                     const std::map<std::int64_t, double>& returns);

struct MeanCi {
  double mean = 0.0;
  double halfWidth = 0.0;  // 1.96 * stderr
  std::size_t n = 0;
};

MeanCi meanConfidence(const std::vector<double>& xs);

}  // namespace data
}  // namespace famo2o
