#include "landseg/tiler/tiles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "landseg/error.hpp"

namespace landseg::tiles {

std::string tile_id_for(const geo::GridSpec& georef) {
  const long long x_m = std::llround(georef.origin_x);
  const long long y_m = std::llround(georef.origin_y);
  const long long x_km = x_m >= 0 ? x_m / 1000 : -((-x_m + 999) / 1000);
  const long long y_km = y_m >= 0 ? y_m / 1000 : -((-y_m + 999) / 1000);
  const long long dx = x_m - x_km * 1000;
  const long long dy = y_m - y_km * 1000;
  char buf[64];
  if (dx == 0 && dy == 0) {
    std::snprintf(buf, sizeof buf, "%04lld_%04lld", x_km, y_km);
  } else {
    std::snprintf(buf, sizeof buf, "%04lld_%04lld_%03lld_%03lld", x_km, y_km, dx, dy);
  }
  return buf;
}

double nodata_fraction(const Image8& labels) {
  if (labels.pixels.empty()) return 0.0;
  const auto n = std::count(labels.pixels.begin(), labels.pixels.end(), geo::kNodata);
  return static_cast<double>(n) / static_cast<double>(labels.pixels.size());
}

std::vector<TileRecord> cut_tiles(const Image8& image, const geo::LabelRaster& labels, int tile_px) {
  if (tile_px <= 0) throw UsageError("tile size must be positive");
  if (image.channels != 3) throw DataError("image raster must have 3 channels");
  if (image.width != labels.grid.width || image.height != labels.grid.height) {
    throw DataError("image and label rasters have mismatched dimensions");
  }
  const int cols = image.width / tile_px;
  const int rows = image.height / tile_px;
  std::vector<TileRecord> out;
  out.reserve(static_cast<std::size_t>(rows) * cols);
  for (int tr = 0; tr < rows; ++tr) {
    for (int tc = 0; tc < cols; ++tc) {
      TileRecord t;
      t.georef = labels.grid.window(tr * tile_px, tc * tile_px, tile_px, tile_px);
      t.tile_id = tile_id_for(t.georef);
      t.image = Image8(tile_px, tile_px, 3);
      t.labels = Image8(tile_px, tile_px, 1);
      for (int r = 0; r < tile_px; ++r) {
        const int sr = tr * tile_px + r;
        const auto* src_img = &image.pixels[(static_cast<std::size_t>(sr) * image.width + tc * tile_px) * 3];
        std::copy_n(src_img, static_cast<std::size_t>(tile_px) * 3, &t.image.pixels[static_cast<std::size_t>(r) * tile_px * 3]);
        const auto* src_lbl = &labels.data[static_cast<std::size_t>(sr) * labels.grid.width + tc * tile_px];
        std::copy_n(src_lbl, tile_px, &t.labels.pixels[static_cast<std::size_t>(r) * tile_px]);
      }
      t.nodata_fraction = nodata_fraction(t.labels);
      out.push_back(std::move(t));
    }
  }
  return out;
}

std::vector<TileRecord> filter_tiles(std::vector<TileRecord> tiles, double max_nodata) {
  if (!(max_nodata >= 0.0 && max_nodata <= 1.0)) throw UsageError("max_nodata must lie in [0, 1]");
  std::erase_if(tiles, [max_nodata](const TileRecord& t) { return t.nodata_fraction > max_nodata; });
  return tiles;
}

}  // namespace landseg::tiles
