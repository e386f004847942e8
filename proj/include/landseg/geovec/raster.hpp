#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "landseg/geovec/geometry.hpp"

namespace landseg::geo {

/// Georeferenced pixel grid. Row 0 is the northernmost row and (origin_x,
/// origin_y) is the top-left corner of pixel (0, 0); y decreases with row.
struct GridSpec {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double pixel_size = 0.5;
  int width = 0;
  int height = 0;

  void validate() const;

  double center_x(int col) const { return origin_x + (col + 0.5) * pixel_size; }
  double center_y(int row) const { return origin_y - (row + 0.5) * pixel_size; }

  /// Sub-grid starting at pixel (row, col).
  GridSpec window(int row, int col, int w, int h) const {
    return {origin_x + col * pixel_size, origin_y - row * pixel_size, pixel_size, w, h};
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct LabelRaster {
  GridSpec grid;
  std::vector<ClassId> data;  // row-major, grid.height x grid.width

  LabelRaster() = default;
  explicit LabelRaster(const GridSpec& g, ClassId fill = kNodata);

  ClassId& at(int row, int col) { return data[static_cast<std::size_t>(row) * grid.width + col]; }
  ClassId at(int row, int col) const { return data[static_cast<std::size_t>(row) * grid.width + col]; }

  friend bool operator==(const LabelRaster&, const LabelRaster&) = default;
};

/// Vegetation first, then building, then road; later entries overwrite earlier ones.
inline constexpr std::array<ClassId, kNumClasses> kDefaultPriority = {0, 1, 2, 3, 4, 5};

/// Paints `value` into every pixel whose center lies inside `polygon` (even-odd
/// over all rings). Boundary convention is half-open: a center exactly on a
/// west or north edge is inside, on an east or south edge outside.
void fill_polygon(LabelRaster& raster, const Polygon& polygon, ClassId value);

/// Rasterizes class-resolved features in priority order. Polylines are
/// buffered by their width first. Features with class nodata or outside the
/// grid are skipped; untouched pixels stay nodata.
LabelRaster rasterize(const FeatureCollection& features, const GridSpec& grid,
                      std::span<const ClassId> priority = kDefaultPriority);

/// Sidecar path holding `origin_x origin_y pixel_size` for an image file.
std::filesystem::path georef_path(const std::filesystem::path& image_path);
void write_georef(const std::filesystem::path& image_path, const GridSpec& grid);
/// Reads the sidecar; width and height are taken from the caller.
GridSpec read_georef(const std::filesystem::path& image_path, int width, int height);

/// Single-channel PNG of raw class ids plus the georeference sidecar.
void write_label_raster(const std::filesystem::path& path, const LabelRaster& raster);
LabelRaster read_label_raster(const std::filesystem::path& path);

}  // namespace landseg::geo
