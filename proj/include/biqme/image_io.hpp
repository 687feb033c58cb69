#pragma once

#include <filesystem>

#include "biqme/image.hpp"

namespace biqme {

// Decodes PNG, BMP or baseline JPEG into 8-bit gray or RGB. Alpha is
// dropped; 16-bit and HDR inputs are rejected.
RasterImage read_image(const std::filesystem::path& path);

// Encodes PNG or BMP (chosen by extension). Both are lossless.
void write_image(const std::filesystem::path& path, const RasterImage& img);

}  // namespace biqme
