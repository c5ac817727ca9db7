#pragma once

#include "gia/model.hpp"

#include <filesystem>

namespace gia {

/// One JSON header line (arch, dims, options, block shapes) followed by the
/// parameter blocks as little-endian f32 in parameters() order.
void save_checkpoint(const GnnModel& model, const std::filesystem::path& path);
GnnModel load_checkpoint(const std::filesystem::path& path);

}  // namespace gia
