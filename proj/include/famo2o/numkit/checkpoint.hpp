#pragma once

#include <string>
#include <utility>
#include <vector>

#include "famo2o/numkit/mlp.hpp"

namespace famo2o {
namespace numkit {

/// Named-network checkpoint, a flat little-endian binary file:
///   u32 magic "FMO2", u32 format version, u32 network count, then per
///   network: u32 name length + name bytes, u32 dim count + u32 dims,
///   then per layer the weight matrix row-major as f64 followed by the bias.
/// Identical parameters serialize to identical bytes, which the replay
/// checks rely on.
void saveCheckpoint(const std::string& path,
                    const std::vector<std::pair<std::string, const Mlp*>>& nets);

std::vector<std::pair<std::string, Mlp>> loadCheckpoint(const std::string& path);

}  // namespace numkit
}  // namespace famo2o
