#pragma once

#include <filesystem>

#include "wcedetect/imgcore.hpp"

namespace wcedetect {

// PNG, PPM and PGM are selected by file extension. Failures throw DataError naming the path.

Frame read_frame(const std::filesystem::path& path);
void write_frame(const std::filesystem::path& path, const Frame& frame);

/// Values are rounded to the nearest integer and clamped to [0,255].
void write_gray(const std::filesystem::path& path, const Image& image);
Image read_gray(const std::filesystem::path& path);

/// Binary masks are stored as 0/255 8-bit images; any nonzero pixel reads back as 1.
void write_mask(const std::filesystem::path& path, const LabelGrid& mask);
LabelGrid read_mask(const std::filesystem::path& path);

}  // namespace wcedetect
