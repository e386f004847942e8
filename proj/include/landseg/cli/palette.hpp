#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "landseg/geovec/geometry.hpp"
#include "landseg/image_io.hpp"

namespace landseg::cli {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

Rgb parse_rgb(std::string_view text);  // "r,g,b"
std::string to_string(const Rgb& c);

struct Palette {
  std::array<Rgb, geo::kNumClasses> classes;
  Rgb nodata;

  /// Dark green, light green, orange-brown, yellow-green, red, gray; black nodata.
  static Palette standard();
  /// Throws UsageError unless all seven colors are distinct.
  void validate() const;
};

/// Class-id raster -> RGB. Throws DataError on ids outside {0..5, 255}.
Image8 colorize(const Image8& labels, const Palette& palette);
/// Inverse of colorize. Throws DataError on colors not in the palette.
Image8 decolorize(const Image8& rgb, const Palette& palette);

}  // namespace landseg::cli
