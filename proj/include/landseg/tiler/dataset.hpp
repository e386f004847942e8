#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "landseg/tiler/tiles.hpp"
#include "landseg/tiler/weights.hpp"

namespace landseg::tiles {

enum class Split { training, validation };

std::string_view to_string(Split split);
Split parse_split(std::string_view name);

struct SplitOptions {
  double training = 0.9;
  double validation = 0.1;
  std::uint64_t seed = 7;
};

struct ManifestEntry {
  Split split = Split::training;
  std::string tile_id;
  double nodata_fraction = 0.0;
  std::filesystem::path image;       // relative to the dataset root
  std::filesystem::path annotation;  // relative to the dataset root

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  WeightVector weights;

  std::vector<const ManifestEntry*> split(Split s) const;
};

inline constexpr std::string_view kManifestName = "manifest.tsv";

/// Relative paths `images/<split>/<id>.png` and `annotations/<split>/<id>.png`.
std::filesystem::path image_relpath(Split split, std::string_view tile_id);
std::filesystem::path annotation_relpath(Split split, std::string_view tile_id);

/// Deterministic seeded split of n items: returns the split for each input index.
std::vector<Split> assign_splits(std::size_t n, const SplitOptions& options);

/// Writes the dataset tree and `manifest.tsv` under root. Entries are listed
/// in input tile order. A single writer per root is assumed.
Manifest write_dataset(const std::vector<TileRecord>& tiles, const SplitOptions& options,
                       const std::filesystem::path& root, const WeightVector& weights);

void write_manifest(const std::filesystem::path& root, const Manifest& manifest);
Manifest read_manifest(const std::filesystem::path& root);

struct DatasetTile {
  std::string tile_id;
  Image8 image;
  Image8 labels;
};

/// Loads every tile of one split listed in the manifest.
std::vector<DatasetTile> read_split(const std::filesystem::path& root, Split split);

}  // namespace landseg::tiles
