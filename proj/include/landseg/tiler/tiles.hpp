#pragma once

#include <string>
#include <vector>

#include "landseg/geovec/raster.hpp"
#include "landseg/image_io.hpp"

namespace landseg::tiles {

/// Paired image/label tile. labels is single-channel with raw class ids.
struct TileRecord {
  std::string tile_id;
  Image8 image;   // tile_px x tile_px x 3
  Image8 labels;  // tile_px x tile_px x 1
  double nodata_fraction = 0.0;
  geo::GridSpec georef;
};

/// `<x_km>_<y_km>` from the top-left corner, zero-padded to 4 digits. Origins
/// that are not kilometre-aligned get a `_<dx_m>_<dy_m>` suffix so that
/// sub-kilometre tiles stay unique.
std::string tile_id_for(const geo::GridSpec& georef);

/// Fraction of pixels equal to the nodata label.
double nodata_fraction(const Image8& labels);

/// Non-overlapping grid-aligned tiles; partial tiles at the right and bottom
/// edges are dropped.
std::vector<TileRecord> cut_tiles(const Image8& image, const geo::LabelRaster& labels, int tile_px = 1000);

/// Keeps tiles whose nodata fraction does not exceed max_nodata, in order.
std::vector<TileRecord> filter_tiles(std::vector<TileRecord> tiles, double max_nodata = 0.5);

}  // namespace landseg::tiles
