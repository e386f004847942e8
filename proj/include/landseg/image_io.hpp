#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace landseg {

/// Interleaved 8-bit raster, row 0 first. channels is 1 (labels) or 3 (RGB).
struct Image8 {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> pixels;

  Image8() = default;
  Image8(int w, int h, int c, std::uint8_t fill = 0)
      : width(w), height(h), channels(c), pixels(static_cast<std::size_t>(w) * h * c, fill) {}

  std::uint8_t& at(int row, int col, int ch = 0) {
    return pixels[(static_cast<std::size_t>(row) * width + col) * channels + ch];
  }
  std::uint8_t at(int row, int col, int ch = 0) const {
    return pixels[(static_cast<std::size_t>(row) * width + col) * channels + ch];
  }

  friend bool operator==(const Image8&, const Image8&) = default;
};

/// Reads an 8-bit grayscale or RGB PNG. Palette and 16-bit files are converted.
Image8 read_png(const std::filesystem::path& path);

/// Writes a 1- or 3-channel PNG. Output bytes depend only on the image content.
void write_png(const std::filesystem::path& path, const Image8& image);

}  // namespace landseg
