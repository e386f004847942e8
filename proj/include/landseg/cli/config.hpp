#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "landseg/cli/palette.hpp"
#include "landseg/geovec/class_map.hpp"
#include "landseg/geovec/geojson.hpp"
#include "landseg/geovec/raster.hpp"
#include "landseg/swin/model.hpp"
#include "landseg/tiler/dataset.hpp"
#include "landseg/tiler/weights.hpp"
#include "landseg/train/trainer.hpp"

namespace landseg::cli {

/// Settings shared by every subcommand. Relative paths are resolved against
/// the directory of the config file.
struct PipelineConfig {
  std::filesystem::path base_dir = ".";

  // [paths]
  std::filesystem::path vectors;
  std::filesystem::path ortho;
  std::filesystem::path dataset = "dataset";
  std::filesystem::path checkpoint = "model.swseg";
  std::filesystem::path class_map;  // empty: built-in table
  std::filesystem::path loss_log = "loss.tsv";
  std::filesystem::path report = "eval_report.txt";
  std::filesystem::path confusion = "confusion.csv";

  // [vectors]
  geo::GeoJsonOptions geojson;
  geo::UnknownPolicy unknown_policy = geo::UnknownPolicy::error;
  std::array<geo::ClassId, geo::kNumClasses> priority = geo::kDefaultPriority;

  // [grid] overrides the ortho georeference sidecar when set.
  std::optional<double> origin_x, origin_y, pixel_size;

  // [tiles]
  int tile_px = 1000;
  double max_nodata = 0.5;
  tiles::SplitOptions split;
  tiles::WeightScheme weight_scheme = tiles::WeightScheme::manual;
  std::array<double, geo::kNumClasses> manual_weights = tiles::kPublishedWeights;

  // [train], [model], [infer]
  train::TrainConfig train;
  nn::SwinConfig model;
  int infer_window = 0;  // 0: train.crop_size
  int infer_stride = 0;  // 0: half the window

  // [palette]
  Palette palette = Palette::standard();

  std::filesystem::path resolve(const std::filesystem::path& p) const;
  int window() const { return infer_window > 0 ? infer_window : train.crop_size; }
  void validate() const;
};

/// Precedence, lowest to highest: built-in defaults, the config file, then
/// `section.key=value` overrides in the order given.
PipelineConfig load_config(const std::optional<std::filesystem::path>& file,
                           const std::vector<std::string>& overrides = {});

/// Serializes a config back to INI text (paths as given, not resolved).
std::string to_ini(const PipelineConfig& config);

}  // namespace landseg::cli
