#include "landseg/geovec/raster.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "landseg/error.hpp"
#include "landseg/geovec/buffer.hpp"
#include "landseg/image_io.hpp"

namespace landseg::geo {

void GridSpec::validate() const {
  if (!(pixel_size > 0.0) || !std::isfinite(pixel_size)) throw UsageError("grid pixel_size must be positive");
  if (width <= 0 || height <= 0) throw UsageError("grid must have positive width and height");
  if (!std::isfinite(origin_x) || !std::isfinite(origin_y)) throw UsageError("grid origin must be finite");
}

LabelRaster::LabelRaster(const GridSpec& g, ClassId fill) : grid(g) {
  grid.validate();
  data.assign(static_cast<std::size_t>(g.width) * g.height, fill);
}

void fill_polygon(LabelRaster& raster, const Polygon& polygon, ClassId value) {
  const GridSpec& g = raster.grid;
  double ymin = INFINITY, ymax = -INFINITY;
  for (const auto& ring : polygon) {
    for (const auto& p : ring) {
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
  }
  if (!(ymin <= ymax)) return;

  // Conservative row window; the crossing test below is authoritative.
  const double row_first = std::floor((g.origin_y - ymax) / g.pixel_size - 0.5) - 1.0;
  const double row_last = std::ceil((g.origin_y - ymin) / g.pixel_size - 0.5) + 1.0;
  if (row_last < 0.0 || row_first >= g.height) return;
  const int r0 = static_cast<int>(std::max(0.0, row_first));
  const int r1 = static_cast<int>(std::min<double>(g.height - 1, row_last));

  std::vector<double> crossings;
  for (int row = r0; row <= r1; ++row) {
    const double cy = g.center_y(row);
    crossings.clear();
    for (const auto& ring : polygon) {
      for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
        const Point& a = ring[i];
        const Point& b = ring[i + 1];
        // Half-open in y: edges spanning (min, max] are counted.
        if ((a.y >= cy) != (b.y >= cy)) {
          crossings.push_back(a.x + (cy - a.y) * (b.x - a.x) / (b.y - a.y));
        }
      }
    }
    std::sort(crossings.begin(), crossings.end());
    // A center is inside iff it lies in [x[2k], x[2k+1]) for some k.
    for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
      const double xa = crossings[k];
      const double xb = crossings[k + 1];
      if (!(xa < xb)) continue;
      double guess = std::floor((xa - g.origin_x) / g.pixel_size - 0.5);
      guess = std::clamp(guess, -1.0, static_cast<double>(g.width));
      int c = static_cast<int>(guess);
      while (c > 0 && g.center_x(c - 1) >= xa) --c;
      c = std::max(c, 0);
      while (c < g.width && g.center_x(c) < xa) ++c;
      ClassId* row_ptr = raster.data.data() + static_cast<std::size_t>(row) * g.width;
      for (; c < g.width && g.center_x(c) < xb; ++c) row_ptr[c] = value;
    }
  }
}

LabelRaster rasterize(const FeatureCollection& features, const GridSpec& grid, std::span<const ClassId> priority) {
  grid.validate();
  if (priority.size() != static_cast<std::size_t>(kNumClasses)) {
    throw UsageError("priority must list each of the 6 classes exactly once");
  }
  std::array<bool, kNumClasses> seen{};
  for (ClassId c : priority) {
    if (c >= kNumClasses || seen[c]) throw UsageError("priority must be a permutation of 0..5");
    seen[c] = true;
  }

  std::vector<Geometry> areas(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    const Feature& f = features[i];
    if (!f.class_id) throw UsageError("feature " + std::to_string(i) + " has no resolved class");
    areas[i] = f.geometry.kind == GeometryKind::polyline ? buffer_polyline(f.geometry, f.geometry.width_m)
                                                          : f.geometry;
  }

  LabelRaster raster(grid);
  for (ClassId cls : priority) {
    for (std::size_t i = 0; i < features.size(); ++i) {
      if (*features[i].class_id != cls) continue;
      for (const auto& poly : areas[i].polygons) fill_polygon(raster, poly, cls);
    }
  }
  return raster;
}

std::filesystem::path georef_path(const std::filesystem::path& image_path) {
  auto p = image_path;
  p.replace_extension(".georef");
  return p;
}

void write_georef(const std::filesystem::path& image_path, const GridSpec& grid) {
  std::ofstream out(georef_path(image_path));
  if (!out) throw DataError("cannot write georeference for '" + image_path.string() + "'");
  char line[128];
  std::snprintf(line, sizeof line, "%.17g %.17g %.17g\n", grid.origin_x, grid.origin_y, grid.pixel_size);
  out << line;
}

GridSpec read_georef(const std::filesystem::path& image_path, int width, int height) {
  std::ifstream in(georef_path(image_path));
  if (!in) throw DataError("missing georeference sidecar for '" + image_path.string() + "'");
  GridSpec g;
  if (!(in >> g.origin_x >> g.origin_y >> g.pixel_size)) {
    throw DataError("malformed georeference sidecar for '" + image_path.string() + "'");
  }
  g.width = width;
  g.height = height;
  g.validate();
  return g;
}

void write_label_raster(const std::filesystem::path& path, const LabelRaster& raster) {
  Image8 image(raster.grid.width, raster.grid.height, 1);
  image.pixels = raster.data;
  write_png(path, image);
  write_georef(path, raster.grid);
}

LabelRaster read_label_raster(const std::filesystem::path& path) {
  Image8 image = read_png(path);
  if (image.channels != 1) throw DataError("label raster '" + path.string() + "' must be single-channel");
  LabelRaster raster;
  raster.grid = read_georef(path, image.width, image.height);
  raster.data = std::move(image.pixels);
  for (ClassId v : raster.data) {
    if (!is_valid_class(v)) throw DataError("label raster '" + path.string() + "' holds an invalid class id");
  }
  return raster;
}

}  // namespace landseg::geo
