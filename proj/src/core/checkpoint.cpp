#include "rmc/core/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace rmc::core {

namespace {

constexpr char kMagic[8] = {'R', 'M', 'C', 'B', 'L', 'K', '0', '1'};
constexpr uint32_t kVersion = 1;

template <typename T>
T swapped(T v) {
  T out;
  auto* src = reinterpret_cast<const unsigned char*>(&v);
  auto* dst = reinterpret_cast<unsigned char*>(&out);
  for (size_t i = 0; i < sizeof(T); ++i) dst[i] = src[sizeof(T) - 1 - i];
  return out;
}

constexpr bool kBigEndian = std::endian::native == std::endian::big;

template <typename T>
void write_le(std::ostream& os, T v) {
  if constexpr (kBigEndian) v = swapped(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw CheckpointError("checkpoint: truncated file");
  if constexpr (kBigEndian) v = swapped(v);
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const std::vector<ParamBlock>& blocks) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw CheckpointError("checkpoint: cannot open for write: " + path);
  os.write(kMagic, sizeof(kMagic));
  write_le<uint32_t>(os, kVersion);
  write_le<uint32_t>(os, static_cast<uint32_t>(blocks.size()));
  for (const ParamBlock& b : blocks) {
    if (b.count() != b.data.size())
      throw CheckpointError("checkpoint: dims disagree with data size for block " + b.name);
    write_le<uint32_t>(os, static_cast<uint32_t>(b.name.size()));
    os.write(b.name.data(), static_cast<std::streamsize>(b.name.size()));
    write_le<uint32_t>(os, static_cast<uint32_t>(b.dims.size()));
    for (uint64_t d : b.dims) write_le<uint64_t>(os, d);
    if constexpr (kBigEndian) {
      for (double v : b.data) write_le<double>(os, v);
    } else {
      os.write(reinterpret_cast<const char*>(b.data.data()),
               static_cast<std::streamsize>(b.data.size() * sizeof(double)));
    }
  }
  if (!os) throw CheckpointError("checkpoint: write failed: " + path);
}

std::vector<ParamBlock> load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("checkpoint: cannot open: " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw CheckpointError("checkpoint: bad magic: " + path);
  const uint32_t version = read_le<uint32_t>(is);
  if (version != kVersion)
    throw CheckpointError("checkpoint: unsupported version " + std::to_string(version));
  const uint32_t count = read_le<uint32_t>(is);
  std::vector<ParamBlock> blocks(count);
  for (ParamBlock& b : blocks) {
    const uint32_t name_len = read_le<uint32_t>(is);
    b.name.resize(name_len);
    is.read(b.name.data(), name_len);
    if (!is) throw CheckpointError("checkpoint: truncated block name");
    const uint32_t ndim = read_le<uint32_t>(is);
    b.dims.resize(ndim);
    for (uint64_t& d : b.dims) d = read_le<uint64_t>(is);
    b.data.resize(b.count());
    if constexpr (kBigEndian) {
      for (double& v : b.data) v = read_le<double>(is);
    } else {
      is.read(reinterpret_cast<char*>(b.data.data()),
              static_cast<std::streamsize>(b.data.size() * sizeof(double)));
      if (!is) throw CheckpointError("checkpoint: truncated block data");
    }
  }
  return blocks;
}

const ParamBlock& find_block(const std::vector<ParamBlock>& blocks, const std::string& name) {
  for (const ParamBlock& b : blocks)
    if (b.name == name) return b;
  throw CheckpointError("checkpoint: missing block " + name);
}

}  // namespace rmc::core
