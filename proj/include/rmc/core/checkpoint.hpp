#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rmc/core/types.hpp"

namespace rmc::core {

// Named tensor block inside a checkpoint file. Values are stored as IEEE
// doubles in little-endian order regardless of host, so files move between
// machines and round-trip bit exactly.
struct ParamBlock {
  std::string name;
  std::vector<uint64_t> dims;
  Vec data;

  uint64_t count() const {
    uint64_t n = 1;
    for (uint64_t d : dims) n *= d;
    return n;
  }
};

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void save_checkpoint(const std::string& path, const std::vector<ParamBlock>& blocks);
std::vector<ParamBlock> load_checkpoint(const std::string& path);

// Lookup helper; throws CheckpointError when the block is absent.
const ParamBlock& find_block(const std::vector<ParamBlock>& blocks, const std::string& name);

}  // namespace rmc::core
