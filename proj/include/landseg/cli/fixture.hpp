#pragma once

#include <cstdint>
#include <filesystem>

#include "landseg/geovec/geometry.hpp"
#include "landseg/geovec/raster.hpp"
#include "landseg/image_io.hpp"

namespace landseg::cli {

/// Synthetic stand-in for orthophoto plus vector layers: each tile holds a
/// background vegetation polygon, a rectangle and a triangle of two other
/// vegetation classes, a building and an L-shaped road.
struct FixtureOptions {
  int tiles_x = 3;
  int tiles_y = 2;
  int tile_px = 1000;
  double pixel_size = 0.5;
  double origin_x = 935000.0;
  double origin_y = 6390000.0;
  /// Leaves 60% of the last tile without vector coverage.
  bool sparse_last_tile = true;
  /// Uniform per-channel noise amplitude added to the class colors.
  int noise = 15;
  std::uint64_t seed = 11;
};

struct Fixture {
  geo::FeatureCollection features;  // source classes only, not resolved
  geo::GridSpec grid;
  Image8 ortho;
  geo::LabelRaster labels;  // ground truth implied by the features
};

/// Ortho color of each class before noise; nodata areas are black.
std::uint8_t fixture_color(int class_id, int channel);

Fixture make_fixture(const FixtureOptions& options);

/// Writes vectors.geojson, ortho.png (+ .georef), classes.tsv and landseg.ini
/// into dir. The config points at these files with relative paths.
void write_fixture(const std::filesystem::path& dir, const FixtureOptions& options);

}  // namespace landseg::cli
