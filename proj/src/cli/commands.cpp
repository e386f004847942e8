#include "landseg/cli/commands.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "landseg/geovec/class_map.hpp"
#include "landseg/geovec/geojson.hpp"
#include "landseg/geovec/raster.hpp"
#include "landseg/swin/checkpoint.hpp"
#include "landseg/tiler/tiles.hpp"
#include "landseg/train/infer.hpp"

namespace fs = std::filesystem;

namespace landseg::cli {

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw DataError("cannot write " + path.string());
}

fs::path require(const PipelineConfig& config, const fs::path& p, const char* key) {
  if (p.empty()) throw UsageError(std::string("config key ") + key + " is not set");
  return config.resolve(p);
}

geo::GridSpec ortho_grid(const PipelineConfig& config, const fs::path& ortho_path, const Image8& ortho) {
  geo::GridSpec grid{0.0, 0.0, 0.5, ortho.width, ortho.height};
  const bool has_sidecar = fs::exists(geo::georef_path(ortho_path));
  if (has_sidecar) grid = geo::read_georef(ortho_path, ortho.width, ortho.height);
  if (!has_sidecar && !(config.origin_x && config.origin_y)) {
    throw DataError("ortho has no georeference sidecar and grid.origin_x/origin_y are unset");
  }
  if (config.origin_x) grid.origin_x = *config.origin_x;
  if (config.origin_y) grid.origin_y = *config.origin_y;
  if (config.pixel_size) grid.pixel_size = *config.pixel_size;
  grid.validate();
  return grid;
}

void copy_georef(const fs::path& from, const fs::path& to, int width, int height) {
  if (fs::exists(geo::georef_path(from))) geo::write_georef(to, geo::read_georef(from, width, height));
}

nn::SwinSegmenter<float> load_model(const PipelineConfig& config) {
  auto ckpt = nn::load_checkpoint(require(config, config.checkpoint, "paths.checkpoint"));
  return nn::SwinSegmenter<float>(ckpt.config, std::move(ckpt.params));
}

std::string format_weights(const tiles::WeightVector& w) {
  std::string s = "(";
  char buf[32];
  for (int c = 0; c < geo::kNumClasses; ++c) {
    std::snprintf(buf, sizeof buf, "%.6g", w[c]);
    s += (c ? ", " : "") + std::string(buf);
  }
  return s + ")";
}

}  // namespace

void cmd_prepare(const PipelineConfig& config, std::ostream& out) {
  const fs::path vectors_path = require(config, config.vectors, "paths.vectors");
  const fs::path ortho_path = require(config, config.ortho, "paths.ortho");
  const fs::path root = require(config, config.dataset, "paths.dataset");

  auto features = run_stage("parse", [&] { return geo::parse_feature_collection(read_text(vectors_path), config.geojson); });
  auto resolved = run_stage("class-map", [&] {
    const geo::ClassMap map = config.class_map.empty()
                                  ? [&] {
                                      auto m = geo::default_class_map();
                                      m.unknown_policy = config.unknown_policy;
                                      return m;
                                    }()
                                  : geo::load_class_map(config.resolve(config.class_map), config.unknown_policy);
    return geo::apply_class_map(features, map);
  });
  Image8 ortho = run_stage("ortho", [&] {
    Image8 img = read_png(ortho_path);
    if (img.channels != 3) throw DataError("ortho must be an RGB image");
    return img;
  });
  const geo::GridSpec grid = run_stage("ortho", [&] { return ortho_grid(config, ortho_path, ortho); });
  auto labels = run_stage("rasterize", [&] { return geo::rasterize(resolved, grid, config.priority); });

  auto cut = run_stage("tile", [&] { return tiles::cut_tiles(ortho, labels, config.tile_px); });
  const std::size_t n_cut = cut.size();
  std::vector<std::pair<std::string, double>> dropped;
  for (const auto& t : cut) {
    if (t.nodata_fraction > config.max_nodata) dropped.emplace_back(t.tile_id, t.nodata_fraction);
  }
  auto kept = run_stage("filter", [&] { return tiles::filter_tiles(std::move(cut), config.max_nodata); });
  if (kept.empty()) throw DataError("filter: every tile exceeds the nodata limit");

  const tiles::WeightVector weights = run_stage("weights", [&] {
    return tiles::compute_weights(tiles::class_stats(kept), config.weight_scheme, config.manual_weights);
  });

  run_stage("write", [&] {
    // Only a previous dataset (recognised by its manifest) is cleared.
    if (fs::exists(root / tiles::kManifestName)) {
      fs::remove_all(root / "images");
      fs::remove_all(root / "annotations");
    }
    return tiles::write_dataset(kept, config.split, root, weights);
  });

  char buf[160];
  std::snprintf(buf, sizeof buf, "prepare: %zu tiles cut, %zu kept, %zu dropped (nodata > %g)\n", n_cut, kept.size(),
                dropped.size(), config.max_nodata);
  out << buf;
  for (const auto& [id, frac] : dropped) {
    std::snprintf(buf, sizeof buf, "dropped\t%s\tnodata=%.6f\n", id.c_str(), frac);
    out << buf;
  }
  out << "dataset: " << root.string() << "\n";
}

void cmd_stats(const PipelineConfig& config, std::optional<tiles::WeightScheme> scheme, std::ostream& out) {
  const fs::path root = require(config, config.dataset, "paths.dataset");
  tiles::ClassHistogram hist;
  std::size_t n = 0;
  run_stage("stats", [&] {
    for (auto split : {tiles::Split::training, tiles::Split::validation}) {
      for (const auto& t : tiles::read_split(root, split)) {
        hist.add(t.labels);
        ++n;
      }
    }
    if (n == 0) throw DataError("dataset has no tiles");
  });
  const auto s = scheme.value_or(config.weight_scheme);
  const auto weights = run_stage("weights", [&] { return tiles::compute_weights(hist, s, config.manual_weights); });
  char buf[160];
  std::snprintf(buf, sizeof buf, "tiles\t%zu\nscheme\t%s\n", n, std::string(tiles::to_string(s)).c_str());
  out << buf << "class\tpixels\tfrequency\tweight\n";
  for (int c = 0; c < geo::kNumClasses; ++c) {
    std::snprintf(buf, sizeof buf, "%d\t%llu\t%.6f\t%.6g\n", c, static_cast<unsigned long long>(hist.counts[c]),
                  hist.frequency(c), weights[c]);
    out << buf;
  }
  out << "total\t" << hist.total << "\n";
  out << "weights " << format_weights(weights) << "\n";
}

void cmd_train(const PipelineConfig& config, std::ostream& out) {
  const fs::path root = require(config, config.dataset, "paths.dataset");
  const int every = std::max(1, config.train.max_steps / 10);
  auto result = run_stage("train", [&] {
    return train::train(root, config.train, config.model, [&](const train::LossRecord& r) {
      if (r.step % every == 0 || r.step + 1 == config.train.max_steps) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "step %d\tlr %.3e\tloss %.5f\n", r.step, r.lr, r.loss);
        out << buf << std::flush;
      }
    });
  });
  run_stage("checkpoint", [&] {
    const fs::path ckpt = require(config, config.checkpoint, "paths.checkpoint");
    if (ckpt.has_parent_path()) fs::create_directories(ckpt.parent_path());
    nn::save_checkpoint(ckpt, config.model, result.model.params());
    train::write_loss_log(config.resolve(config.loss_log), result.log);
  });
  out << "checkpoint: " << config.resolve(config.checkpoint).string() << "\n";
}

void cmd_eval(const PipelineConfig& config, const std::optional<fs::path>& predictions_dir, std::ostream& out) {
  const fs::path root = require(config, config.dataset, "paths.dataset");
  const auto report = run_stage("eval", [&] {
    if (!predictions_dir) {
      const auto model = load_model(config);
      return train::evaluate(model, root, config.window(), config.infer_stride, config.train.ignore_index);
    }
    const auto tiles = tiles::read_split(root, tiles::Split::validation);
    if (tiles.empty()) throw DataError("validation split is empty");
    train::ConfusionMatrix cm;
    for (const auto& t : tiles) {
      const Image8 pred = read_png(*predictions_dir / (t.tile_id + ".png"));
      if (pred.channels != 1 || pred.width != t.labels.width || pred.height != t.labels.height) {
        throw DataError("prediction for " + t.tile_id + " does not match its annotation");
      }
      cm.add(t.labels.pixels, pred.pixels, config.train.ignore_index);
    }
    return train::EvalReport::from(cm);
  });
  run_stage("report", [&] {
    write_text(config.resolve(config.report), report.to_text());
    write_text(config.resolve(config.confusion), report.confusion.to_csv());
  });
  out << report.to_text();
}

void cmd_infer(const PipelineConfig& config, const fs::path& input, const fs::path& output, std::ostream& out) {
  const auto model = run_stage("checkpoint", [&] { return load_model(config); });
  const Image8 image = run_stage("read", [&] {
    Image8 img = read_png(input);
    if (img.channels != 3) throw DataError("input must be an RGB image");
    return img;
  });
  const int window = config.window();
  const int stride = config.infer_stride > 0 ? config.infer_stride : std::max(window / 2, 1);
  const Image8 labels = run_stage("infer", [&] { return train::sliding_infer(model, image, window, stride); });
  run_stage("write", [&] {
    if (output.has_parent_path()) fs::create_directories(output.parent_path());
    write_png(output, labels);
    copy_georef(input, output, image.width, image.height);
  });
  char buf[160];
  std::snprintf(buf, sizeof buf, "infer: %dx%d, window %d, stride %d\n", image.width, image.height, window, stride);
  out << buf << "labels: " << output.string() << "\n";
}

void cmd_colorize(const PipelineConfig& config, const fs::path& input, const fs::path& output, bool inverse,
                  std::ostream& out) {
  const Image8 src = run_stage("read", [&] { return read_png(input); });
  const Image8 dst = run_stage(inverse ? "decolorize" : "colorize", [&] {
    return inverse ? decolorize(src, config.palette) : colorize(src, config.palette);
  });
  run_stage("write", [&] {
    if (output.has_parent_path()) fs::create_directories(output.parent_path());
    write_png(output, dst);
    copy_georef(input, output, src.width, src.height);
  });
  out << (inverse ? "labels: " : "colorized: ") << output.string() << "\n";
}

}  // namespace landseg::cli
