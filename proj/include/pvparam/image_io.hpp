#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace pvparam {

/// 8-bit single-channel raster, row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
};

/// Dispatches on the file signature: binary PGM ("P5") or PNG. Anything
/// other than 8-bit single-channel data is rejected with FormatError.
GrayImage read_gray_image(const std::filesystem::path& path);

void write_pgm(const std::filesystem::path& path, const GrayImage& image);
void write_png(const std::filesystem::path& path, const GrayImage& image);

}  // namespace pvparam
