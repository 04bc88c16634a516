#pragma once

#include <string>
#include <vector>

#include "famo2o/data/transition.hpp"

namespace famo2o {
namespace data {

/// One JSON object per line:
///   {"episode":0,"t":0,"s":[..],"a":[..],"r":-1.0,"s_next":[..],"done":false}
/// Numbers round-trip exactly (doubles are printed with full precision).
void saveJsonl(const std::string& path, const std::vector<Transition>& ts);

/// Throws with the offending line number on malformed input and a distinct
/// error when the file cannot be opened.
std::vector<Transition> loadJsonl(const std::string& path);

}  // namespace data
}  // namespace famo2o
