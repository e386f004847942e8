#include "landseg/cli/fixture.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <random>

#include "landseg/cli/config.hpp"
#include "landseg/error.hpp"
#include "landseg/geovec/class_map.hpp"
#include "landseg/geovec/geojson.hpp"

namespace fs = std::filesystem;

namespace landseg::cli {

namespace {

constexpr std::array<const char*, geo::kNumClasses> kSourceNames = {
    "foret_fermee_feuillus", "foret_ouverte_coniferes", "lande_ligneuse", "formation_herbacee", "batiment", "route"};

constexpr std::array<std::array<std::uint8_t, 3>, geo::kNumClasses> kColors = {{
    {30, 80, 35},
    {100, 150, 60},
    {150, 100, 60},
    {200, 205, 100},
    {205, 60, 55},
    {115, 115, 135},
}};

struct TileFrame {
  double x0, y0, size;
  geo::Point at(double u, double v) const { return {x0 + u * size, y0 - v * size}; }
};

geo::Feature polygon_feature(int cls, const TileFrame& f, std::initializer_list<std::pair<double, double>> uv) {
  geo::Ring ring;
  for (auto [u, v] : uv) ring.push_back(f.at(u, v));
  ring.push_back(ring.front());
  geo::Feature feat;
  feat.geometry.kind = geo::GeometryKind::polygon;
  feat.geometry.polygons = {{ring}};
  feat.source_class = kSourceNames[cls];
  return feat;
}

geo::Feature rect_feature(int cls, const TileFrame& f, double u0, double v0, double u1, double v1) {
  return polygon_feature(cls, f, {{u0, v0}, {u1, v0}, {u1, v1}, {u0, v1}});
}

}  // namespace

std::uint8_t fixture_color(int class_id, int channel) {
  if (class_id == geo::kNodata) return 0;
  return kColors.at(class_id).at(channel);
}

Fixture make_fixture(const FixtureOptions& o) {
  if (o.tiles_x < 1 || o.tiles_y < 1 || o.tile_px < 8) throw UsageError("fixture needs at least one 8 px tile");
  if (!(o.pixel_size > 0.0)) throw UsageError("fixture pixel size must be positive");
  Fixture fx;
  fx.grid = {o.origin_x, o.origin_y, o.pixel_size, o.tiles_x * o.tile_px, o.tiles_y * o.tile_px};
  const double size = o.tile_px * o.pixel_size;
  for (int ty = 0; ty < o.tiles_y; ++ty) {
    for (int tx = 0; tx < o.tiles_x; ++tx) {
      const TileFrame f{o.origin_x + tx * size, o.origin_y - ty * size, size};
      const int base = (tx + ty * o.tiles_x) % 4;
      const bool sparse = o.sparse_last_tile && tx == o.tiles_x - 1 && ty == o.tiles_y - 1;
      if (sparse) {
        fx.features.push_back(rect_feature(base, f, 0.0, 0.0, 0.4, 1.0));
        continue;
      }
      fx.features.push_back(rect_feature(base, f, 0.0, 0.0, 1.0, 1.0));
      fx.features.push_back(rect_feature((base + 1) % 4, f, 0.55, 0.05, 0.95, 0.45));
      fx.features.push_back(polygon_feature((base + 2) % 4, f, {{0.1, 0.55}, {0.5, 0.95}, {0.1, 0.95}}));
      fx.features.push_back(rect_feature(4, f, 0.6, 0.6, 0.8, 0.8));
      geo::Feature road;
      road.geometry.kind = geo::GeometryKind::polyline;
      road.geometry.path = {f.at(0.0, 0.5), f.at(0.5, 0.5), f.at(0.5, 0.0)};
      road.geometry.width_m = 0.06 * size;
      road.source_class = kSourceNames[5];
      fx.features.push_back(road);
    }
  }
  fx.labels = geo::rasterize(geo::apply_class_map(fx.features, geo::default_class_map()), fx.grid);
  fx.ortho = Image8(fx.grid.width, fx.grid.height, 3);
  std::mt19937_64 rng(o.seed);
  const auto span = static_cast<std::uint64_t>(2 * o.noise + 1);
  for (std::size_t p = 0; p < fx.labels.data.size(); ++p) {
    const int cls = fx.labels.data[p];
    for (int ch = 0; ch < 3; ++ch) {
      int v = fixture_color(cls, ch);
      if (cls != geo::kNodata && o.noise > 0) v += static_cast<int>(rng() % span) - o.noise;
      fx.ortho.pixels[3 * p + ch] = static_cast<std::uint8_t>(std::clamp(v, 0, 255));
    }
  }
  return fx;
}

void write_fixture(const fs::path& dir, const FixtureOptions& options) {
  const Fixture fx = make_fixture(options);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());

  std::ofstream vec(dir / "vectors.geojson", std::ios::binary);
  vec << geo::to_geojson(fx.features);
  if (!vec) throw DataError("cannot write " + (dir / "vectors.geojson").string());

  write_png(dir / "ortho.png", fx.ortho);
  geo::write_georef(dir / "ortho.png", fx.grid);

  std::ofstream cls(dir / "classes.tsv", std::ios::binary);
  cls << "# source_class\ttarget_id\n";
  for (const auto& [name, id] : geo::default_class_map().entries) cls << name << "\t" << static_cast<int>(id) << "\n";
  if (!cls) throw DataError("cannot write " + (dir / "classes.tsv").string());

  PipelineConfig cfg;
  cfg.vectors = "vectors.geojson";
  cfg.ortho = "ortho.png";
  cfg.class_map = "classes.tsv";
  cfg.tile_px = options.tile_px;
  cfg.split.training = 0.8;
  cfg.split.validation = 0.2;
  cfg.model = nn::SwinConfig::tiny();
  cfg.train.max_steps = 100;
  cfg.train.batch_size = 2;
  cfg.infer_window = std::min(384, options.tile_px);
  std::ofstream ini(dir / "landseg.ini", std::ios::binary);
  ini << to_ini(cfg);
  if (!ini) throw DataError("cannot write " + (dir / "landseg.ini").string());
}

}  // namespace landseg::cli
