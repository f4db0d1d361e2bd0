#pragma once

#include <filesystem>
#include <string>

#include "graphfed/model.hpp"

namespace graphfed {

// "GFPM", u32 version, u32 tensor count, then per tensor: u32 rank,
// u64 dims..., f32 little-endian data.
inline constexpr char kParamsMagic[4] = {'G', 'F', 'P', 'M'};
inline constexpr std::uint32_t kParamsVersion = 1;

std::string serialize_params(const ModelParams& p);
/// Throws InputError on bad magic/version, non-matrix ranks or byte counts
/// that disagree with the declared dimensions.
ModelParams deserialize_params(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const ModelParams& p);
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace graphfed
