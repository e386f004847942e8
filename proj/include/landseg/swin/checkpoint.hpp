#pragma once

#include <filesystem>
#include <string_view>

#include "landseg/swin/model.hpp"

namespace landseg::nn {

inline constexpr std::string_view kCheckpointMagic = "SWSEG1";

/// Binary layout, all integers u32 little-endian:
///   "SWSEG1" | header_len | header (key=value lines of SwinConfig)
///   | tensor_count | { name_len | name | rank | dims[rank] | f32 LE data }*
void save_checkpoint(const std::filesystem::path& path, const SwinConfig& config, const ParamStore<float>& params);

struct Checkpoint {
  SwinConfig config;
  ParamStore<float> params;
};

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace landseg::nn
