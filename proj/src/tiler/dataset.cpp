#include "landseg/tiler/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "landseg/error.hpp"
#include "landseg/image_io.hpp"

namespace fs = std::filesystem;

namespace landseg::tiles {

std::string_view to_string(Split split) { return split == Split::training ? "training" : "validation"; }

Split parse_split(std::string_view name) {
  if (name == "training") return Split::training;
  if (name == "validation") return Split::validation;
  throw DataError("unknown split '" + std::string(name) + "'");
}

std::vector<const ManifestEntry*> Manifest::split(Split s) const {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : entries) {
    if (e.split == s) out.push_back(&e);
  }
  return out;
}

fs::path image_relpath(Split split, std::string_view tile_id) {
  return fs::path("images") / std::string(to_string(split)) / (std::string(tile_id) + ".png");
}

fs::path annotation_relpath(Split split, std::string_view tile_id) {
  return fs::path("annotations") / std::string(to_string(split)) / (std::string(tile_id) + ".png");
}

std::vector<Split> assign_splits(std::size_t n, const SplitOptions& options) {
  if (options.training < 0.0 || options.validation < 0.0 ||
      std::abs(options.training + options.validation - 1.0) > 1e-9) {
    throw UsageError("split fractions must be non-negative and sum to 1");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Fisher-Yates driven directly by the engine so the result is portable.
  std::mt19937_64 rng(options.seed);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = rng() % i;
    std::swap(order[i - 1], order[j]);
  }
  const auto n_train = static_cast<std::size_t>(std::llround(options.training * static_cast<double>(n)));
  std::vector<Split> out(n, Split::validation);
  for (std::size_t k = 0; k < n_train && k < n; ++k) out[order[k]] = Split::training;
  return out;
}

Manifest write_dataset(const std::vector<TileRecord>& tiles, const SplitOptions& options, const fs::path& root,
                       const WeightVector& weights) {
  if (tiles.empty()) throw DataError("no tiles to write");
  std::set<std::string> ids;
  for (const auto& t : tiles) {
    if (!ids.insert(t.tile_id).second) throw DataError("duplicate tile id '" + t.tile_id + "'");
  }
  const auto splits = assign_splits(tiles.size(), options);

  std::error_code ec;
  for (Split s : {Split::training, Split::validation}) {
    for (const char* sub : {"images", "annotations"}) {
      fs::create_directories(root / sub / std::string(to_string(s)), ec);
      if (ec) throw DataError("cannot create '" + (root / sub).string() + "': " + ec.message());
    }
  }

  Manifest manifest;
  manifest.weights = weights;
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    const TileRecord& t = tiles[i];
    ManifestEntry e{splits[i], t.tile_id, t.nodata_fraction, image_relpath(splits[i], t.tile_id),
                    annotation_relpath(splits[i], t.tile_id)};
    write_png(root / e.image, t.image);
    write_png(root / e.annotation, t.labels);
    manifest.entries.push_back(std::move(e));
  }
  write_manifest(root, manifest);
  return manifest;
}

void write_manifest(const fs::path& root, const Manifest& manifest) {
  std::ofstream out(root / std::string(kManifestName));
  if (!out) throw DataError("cannot write manifest under '" + root.string() + "'");
  out << "# split\ttile_id\tnodata_fraction\timage\tannotation\n";
  char buf[64];
  for (const auto& e : manifest.entries) {
    std::snprintf(buf, sizeof buf, "%.6f", e.nodata_fraction);
    out << to_string(e.split) << '\t' << e.tile_id << '\t' << buf << '\t' << e.image.generic_string() << '\t'
        << e.annotation.generic_string() << '\n';
  }
  out << "weights";
  for (double w : manifest.weights.w) {
    // Shortest text that reads back to the same double.
    const auto end = std::to_chars(buf, buf + sizeof buf, w).ptr;
    out << '\t' << std::string_view(buf, static_cast<std::size_t>(end - buf));
  }
  out << '\n';
}

Manifest read_manifest(const fs::path& root) {
  const fs::path path = root / std::string(kManifestName);
  std::ifstream in(path);
  if (!in) throw DataError("missing manifest '" + path.string() + "'");
  Manifest manifest;
  bool have_weights = false;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string col; std::getline(ss, col, '\t');) cols.push_back(col);
    if (cols[0] == "weights") {
      if (cols.size() != 7) throw DataError("manifest weights line must hold 6 values");
      std::array<double, geo::kNumClasses> w{};
      for (int c = 0; c < geo::kNumClasses; ++c) w[c] = std::stod(cols[c + 1]);
      manifest.weights = WeightVector(w);
      have_weights = true;
      continue;
    }
    if (cols.size() < 3) throw DataError("malformed manifest line: " + line);
    ManifestEntry e;
    e.split = parse_split(cols[0]);
    e.tile_id = cols[1];
    e.nodata_fraction = std::stod(cols[2]);
    e.image = cols.size() > 3 ? fs::path(cols[3]) : image_relpath(e.split, e.tile_id);
    e.annotation = cols.size() > 4 ? fs::path(cols[4]) : annotation_relpath(e.split, e.tile_id);
    manifest.entries.push_back(std::move(e));
  }
  if (!have_weights) throw DataError("manifest lacks a weights line");
  return manifest;
}

std::vector<DatasetTile> read_split(const fs::path& root, Split split) {
  const Manifest manifest = read_manifest(root);
  std::vector<DatasetTile> out;
  for (const ManifestEntry* e : manifest.split(split)) {
    DatasetTile t{e->tile_id, read_png(root / e->image), read_png(root / e->annotation)};
    if (t.image.channels != 3 || t.labels.channels != 1 || t.image.width != t.labels.width ||
        t.image.height != t.labels.height) {
      throw DataError("tile '" + e->tile_id + "' has inconsistent image/annotation rasters");
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace landseg::tiles
