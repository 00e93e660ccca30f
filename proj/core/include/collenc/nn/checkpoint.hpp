#pragma once

#include <filesystem>
#include <string>

#include "collenc/nn/vae.hpp"

namespace collenc::nn {

// Checkpoint layout, all integers little-endian:
//   "CVAE"  u32 version (1)
//   u32 config JSON length, config JSON bytes
//   u32 tensor count, then per tensor:
//     u32 name length, name bytes, u32 rank, u64 dims[rank], f64 data[]
void save_checkpoint(const VaeModel& model, const std::filesystem::path& path);
/// Throws IoError on malformed files and std::invalid_argument when the
/// tensor table does not match the stored config.
VaeModel load_checkpoint(const std::filesystem::path& path);

std::string serialize_checkpoint(const VaeModel& model);
VaeModel deserialize_checkpoint(const std::string& bytes);

}  // namespace collenc::nn
