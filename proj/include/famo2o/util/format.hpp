#pragma once

#include <charconv>
#include <string>

namespace famo2o {
namespace util {

/// Shortest decimal form that round-trips the double exactly. Used for every
/// number written to CSV/JSON reports so replayed runs produce byte-identical
/// files.
inline std::string formatDouble(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace util
}  // namespace famo2o
