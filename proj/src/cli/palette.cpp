#include "landseg/cli/palette.hpp"

#include <charconv>

#include "landseg/error.hpp"

namespace landseg::cli {

Rgb parse_rgb(std::string_view text) {
  std::array<int, 3> v{};
  std::size_t pos = 0;
  for (int i = 0; i < 3; ++i) {
    while (pos < text.size() && text[pos] == ' ') ++pos;
    const char* first = text.data() + pos;
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v[i]);
    if (ec != std::errc() || v[i] < 0 || v[i] > 255) throw UsageError("bad color '" + std::string(text) + "'");
    pos = static_cast<std::size_t>(ptr - text.data());
    while (pos < text.size() && text[pos] == ' ') ++pos;
    if (i < 2) {
      if (pos >= text.size() || text[pos] != ',') throw UsageError("bad color '" + std::string(text) + "'");
      ++pos;
    }
  }
  if (pos != text.size()) throw UsageError("bad color '" + std::string(text) + "'");
  return {static_cast<std::uint8_t>(v[0]), static_cast<std::uint8_t>(v[1]), static_cast<std::uint8_t>(v[2])};
}

std::string to_string(const Rgb& c) {
  return std::to_string(c.r) + "," + std::to_string(c.g) + "," + std::to_string(c.b);
}

Palette Palette::standard() {
  return Palette{{Rgb{0, 100, 0}, Rgb{144, 238, 144}, Rgb{204, 119, 34}, Rgb{173, 255, 47}, Rgb{220, 20, 20},
                  Rgb{128, 128, 128}},
                 Rgb{0, 0, 0}};
}

void Palette::validate() const {
  std::array<Rgb, geo::kNumClasses + 1> all{};
  for (int c = 0; c < geo::kNumClasses; ++c) all[c] = classes[c];
  all[geo::kNumClasses] = nodata;
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      if (all[i] == all[j]) throw UsageError("palette colors must be distinct (" + to_string(all[i]) + ")");
    }
  }
}

Image8 colorize(const Image8& labels, const Palette& palette) {
  if (labels.channels != 1) throw DataError("colorize expects a single-channel label image");
  Image8 out(labels.width, labels.height, 3);
  for (std::size_t i = 0; i < labels.pixels.size(); ++i) {
    const std::uint8_t id = labels.pixels[i];
    Rgb c;
    if (id == geo::kNodata) {
      c = palette.nodata;
    } else if (id < geo::kNumClasses) {
      c = palette.classes[id];
    } else {
      throw DataError("label value " + std::to_string(id) + " is not a class id");
    }
    out.pixels[3 * i] = c.r;
    out.pixels[3 * i + 1] = c.g;
    out.pixels[3 * i + 2] = c.b;
  }
  return out;
}

Image8 decolorize(const Image8& rgb, const Palette& palette) {
  if (rgb.channels != 3) throw DataError("decolorize expects an RGB image");
  Image8 out(rgb.width, rgb.height, 1);
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    const Rgb c{rgb.pixels[3 * i], rgb.pixels[3 * i + 1], rgb.pixels[3 * i + 2]};
    int id = -1;
    if (c == palette.nodata) id = geo::kNodata;
    for (int k = 0; k < geo::kNumClasses && id < 0; ++k) {
      if (c == palette.classes[k]) id = k;
    }
    if (id < 0) throw DataError("color " + to_string(c) + " is not in the palette");
    out.pixels[i] = static_cast<std::uint8_t>(id);
  }
  return out;
}

}  // namespace landseg::cli
