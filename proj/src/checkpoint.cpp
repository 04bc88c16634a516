#include "famo2o/numkit/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace famo2o {
namespace numkit {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian");

namespace {

constexpr std::uint32_t kMagic = 0x324F4D46;  // "FMO2"
constexpr std::uint32_t kVersion = 1;

void writeU32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t readU32(std::istream& is) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

void writeF64(std::ostream& os, double v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

double readF64(std::istream& is) {
  double v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

}  // namespace

void saveCheckpoint(const std::string& path,
                    const std::vector<std::pair<std::string, const Mlp*>>& nets) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("checkpoint: cannot open for write: " + path);
  writeU32(os, kMagic);
  writeU32(os, kVersion);
  writeU32(os, static_cast<std::uint32_t>(nets.size()));
  for (const auto& [name, net] : nets) {
    writeU32(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    writeU32(os, static_cast<std::uint32_t>(net->dims().size()));
    for (Index d : net->dims()) writeU32(os, static_cast<std::uint32_t>(d));
    for (std::size_t l = 0; l < net->layerCount(); ++l) {
      const Mat& W = net->weight(l);
      for (Index i = 0; i < W.rows(); ++i) {
        for (Index j = 0; j < W.cols(); ++j) writeF64(os, W(i, j));
      }
      const Vec& b = net->bias(l);
      for (Index i = 0; i < b.size(); ++i) writeF64(os, b[i]);
    }
  }
  if (!os) throw std::runtime_error("checkpoint: write failed: " + path);
}

std::vector<std::pair<std::string, Mlp>> loadCheckpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open: " + path);
  if (readU32(is) != kMagic) throw std::runtime_error("checkpoint: bad magic: " + path);
  if (readU32(is) != kVersion) {
    throw std::runtime_error("checkpoint: unsupported version: " + path);
  }
  const std::uint32_t count = readU32(is);
  std::vector<std::pair<std::string, Mlp>> out;
  out.reserve(count);
  Rng initRng(0);  // placeholder init, parameters overwritten below
  for (std::uint32_t n = 0; n < count; ++n) {
    const std::uint32_t nameLen = readU32(is);
    std::string name(nameLen, '\0');
    is.read(name.data(), nameLen);
    if (!is) throw std::runtime_error("checkpoint: truncated file");
    const std::uint32_t dimCount = readU32(is);
    if (dimCount < 2) throw std::runtime_error("checkpoint: bad dim count");
    std::vector<Index> dims(dimCount);
    for (auto& d : dims) d = static_cast<Index>(readU32(is));
    Mlp net(dims, initRng);
    for (std::size_t l = 0; l < net.layerCount(); ++l) {
      Mat& W = net.weight(l);
      for (Index i = 0; i < W.rows(); ++i) {
        for (Index j = 0; j < W.cols(); ++j) W(i, j) = readF64(is);
      }
      Vec& b = net.bias(l);
      for (Index i = 0; i < b.size(); ++i) b[i] = readF64(is);
    }
    out.emplace_back(std::move(name), std::move(net));
  }
  return out;
}

}  // namespace numkit
}  // namespace famo2o
