#include "landseg/cli/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "landseg/error.hpp"

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace landseg::cli {

namespace {

const std::set<std::string> kKnownKeys = {
    "paths.vectors",          "paths.ortho",         "paths.dataset",        "paths.checkpoint",
    "paths.class_map",        "paths.loss_log",      "paths.report",         "paths.confusion",
    "vectors.class_property", "vectors.width_property", "vectors.default_width_m", "vectors.unknown_policy",
    "vectors.priority",       "grid.origin_x",       "grid.origin_y",        "grid.pixel_size",
    "tiles.tile_px",          "tiles.max_nodata",    "tiles.train_fraction", "tiles.seed",
    "tiles.weight_scheme",    "tiles.weights",       "train.crop_size",      "train.max_steps",
    "train.base_lr",          "train.weight_decay",  "train.poly_power",     "train.seed",
    "train.batch_size",       "train.ignore_index",  "train.weights",        "model.preset",
    "model.patch_size",       "model.window_size",   "model.embed_dim",      "model.depths",
    "model.num_heads",        "model.mlp_ratio",     "model.decoder_channels", "infer.window",
    "infer.stride",           "palette.class0",      "palette.class1",       "palette.class2",
    "palette.class3",         "palette.class4",      "palette.class5",       "palette.nodata",
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    const auto a = item.find_first_not_of(" \t");
    const auto b = item.find_last_not_of(" \t");
    out.push_back(a == std::string::npos ? std::string() : item.substr(a, b - a + 1));
  }
  return out;
}

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  T v{};
  if (!(in >> v) || !(in >> std::ws).eof()) throw UsageError("config " + key + ": cannot parse '" + text + "'");
  return v;
}

template <typename T, std::size_t N>
std::array<T, N> parse_array(const std::string& key, const std::string& text) {
  const auto items = split_list(text);
  if (items.size() != N) {
    throw UsageError("config " + key + ": expected " + std::to_string(N) + " comma-separated values");
  }
  std::array<T, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = parse_value<T>(key, items[i]);
  return out;
}

std::string fmt_double(double v);

template <std::size_t N>
std::string join(const std::array<double, N>& values) {
  std::string out;
  for (std::size_t i = 0; i < N; ++i) out += (i ? "," : "") + fmt_double(values[i]);
  return out;
}

template <typename T, std::size_t N>
std::string join_int(const std::array<T, N>& values) {
  std::string out;
  for (std::size_t i = 0; i < N; ++i) out += (i ? "," : "") + std::to_string(static_cast<long long>(values[i]));
  return out;
}

// Shortest of %.15g / %.17g that reads back to the same double.
std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  if (std::strtod(buf, nullptr) != v) std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

fs::path PipelineConfig::resolve(const fs::path& p) const {
  if (p.empty() || p.is_absolute()) return p;
  return base_dir / p;
}

void PipelineConfig::validate() const {
  if (tile_px <= 0) throw UsageError("tiles.tile_px must be positive");
  if (!(max_nodata >= 0.0 && max_nodata <= 1.0)) throw UsageError("tiles.max_nodata must lie in [0, 1]");
  if (!(split.training >= 0.0 && split.training <= 1.0)) throw UsageError("tiles.train_fraction must lie in [0, 1]");
  if (pixel_size && !(*pixel_size > 0.0)) throw UsageError("grid.pixel_size must be positive");
  if (infer_window < 0 || infer_stride < 0) throw UsageError("infer.window and infer.stride must be non-negative");
  if (infer_stride > window()) throw UsageError("infer.stride must not exceed the window");
  tiles::WeightVector check(manual_weights);
  (void)check;
  train.validate();
  model.validate();
  palette.validate();
}

PipelineConfig load_config(const std::optional<fs::path>& file, const std::vector<std::string>& overrides) {
  pt::ptree tree;
  PipelineConfig cfg;
  if (file) {
    std::ifstream in(*file);
    if (!in) throw UsageError("cannot open config file " + file->string());
    try {
      pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
      throw UsageError("config " + file->string() + ": " + e.message() + " at line " + std::to_string(e.line()));
    }
    cfg.base_dir = file->parent_path().empty() ? fs::path(".") : file->parent_path();
  }
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("override '" + ov + "' is not section.key=value");
    tree.put(pt::ptree::path_type(ov.substr(0, eq), '.'), ov.substr(eq + 1));
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw UsageError("config key '" + section + "' must live in a section");
    for (const auto& [key, value] : body) {
      if (!kKnownKeys.count(section + "." + key)) throw UsageError("unknown config key '" + section + "." + key + "'");
      (void)value;
    }
  }
  auto get = [&](const std::string& key) -> std::optional<std::string> {
    auto v = tree.get_optional<std::string>(pt::ptree::path_type(key, '.'));
    if (v) return *v;
    return std::nullopt;
  };
  auto num = [&]<typename T>(const std::string& key, T& dst) {
    if (auto v = get(key)) dst = parse_value<T>(key, *v);
  };

  if (auto v = get("paths.vectors")) cfg.vectors = *v;
  if (auto v = get("paths.ortho")) cfg.ortho = *v;
  if (auto v = get("paths.dataset")) cfg.dataset = *v;
  if (auto v = get("paths.checkpoint")) cfg.checkpoint = *v;
  if (auto v = get("paths.class_map")) cfg.class_map = *v;
  if (auto v = get("paths.loss_log")) cfg.loss_log = *v;
  if (auto v = get("paths.report")) cfg.report = *v;
  if (auto v = get("paths.confusion")) cfg.confusion = *v;

  if (auto v = get("vectors.class_property")) cfg.geojson.class_property = *v;
  if (auto v = get("vectors.width_property")) cfg.geojson.width_property = *v;
  num("vectors.default_width_m", cfg.geojson.default_width_m);
  if (auto v = get("vectors.unknown_policy")) {
    if (*v == "error") {
      cfg.unknown_policy = geo::UnknownPolicy::error;
    } else if (*v == "nodata") {
      cfg.unknown_policy = geo::UnknownPolicy::nodata;
    } else {
      throw UsageError("vectors.unknown_policy must be error or nodata");
    }
  }
  if (auto v = get("vectors.priority")) {
    auto ids = parse_array<int, geo::kNumClasses>("vectors.priority", *v);
    for (int i = 0; i < geo::kNumClasses; ++i) {
      if (ids[i] < 0 || ids[i] >= geo::kNumClasses) throw UsageError("vectors.priority entries must be 0..5");
      cfg.priority[i] = static_cast<geo::ClassId>(ids[i]);
    }
  }

  if (auto v = get("grid.origin_x")) cfg.origin_x = parse_value<double>("grid.origin_x", *v);
  if (auto v = get("grid.origin_y")) cfg.origin_y = parse_value<double>("grid.origin_y", *v);
  if (auto v = get("grid.pixel_size")) cfg.pixel_size = parse_value<double>("grid.pixel_size", *v);

  num("tiles.tile_px", cfg.tile_px);
  num("tiles.max_nodata", cfg.max_nodata);
  if (auto v = get("tiles.train_fraction")) {
    cfg.split.training = parse_value<double>("tiles.train_fraction", *v);
    cfg.split.validation = 1.0 - cfg.split.training;
  }
  num("tiles.seed", cfg.split.seed);
  if (auto v = get("tiles.weight_scheme")) cfg.weight_scheme = tiles::parse_weight_scheme(*v);
  if (auto v = get("tiles.weights")) cfg.manual_weights = parse_array<double, geo::kNumClasses>("tiles.weights", *v);

  num("train.crop_size", cfg.train.crop_size);
  num("train.max_steps", cfg.train.max_steps);
  num("train.base_lr", cfg.train.base_lr);
  num("train.weight_decay", cfg.train.weight_decay);
  num("train.poly_power", cfg.train.poly_power);
  num("train.seed", cfg.train.seed);
  num("train.batch_size", cfg.train.batch_size);
  if (auto v = get("train.ignore_index")) {
    const int id = parse_value<int>("train.ignore_index", *v);
    if (id < 0 || id > 255) throw UsageError("train.ignore_index must be 0..255");
    cfg.train.ignore_index = static_cast<std::uint8_t>(id);
  }
  if (auto v = get("train.weights")) {
    cfg.train.weights = tiles::WeightVector(parse_array<double, geo::kNumClasses>("train.weights", *v));
  }

  if (auto v = get("model.preset")) {
    if (*v == "tiny") {
      cfg.model = nn::SwinConfig::tiny();
    } else if (*v == "desk") {
      cfg.model = nn::SwinConfig{};
    } else {
      throw UsageError("model.preset must be tiny or desk");
    }
  }
  num("model.patch_size", cfg.model.patch_size);
  num("model.window_size", cfg.model.window_size);
  num("model.embed_dim", cfg.model.embed_dim);
  if (auto v = get("model.depths")) cfg.model.depths = parse_array<int, 4>("model.depths", *v);
  if (auto v = get("model.num_heads")) cfg.model.num_heads = parse_array<int, 4>("model.num_heads", *v);
  num("model.mlp_ratio", cfg.model.mlp_ratio);
  num("model.decoder_channels", cfg.model.decoder_channels);

  num("infer.window", cfg.infer_window);
  num("infer.stride", cfg.infer_stride);

  for (int c = 0; c < geo::kNumClasses; ++c) {
    if (auto v = get("palette.class" + std::to_string(c))) cfg.palette.classes[c] = parse_rgb(*v);
  }
  if (auto v = get("palette.nodata")) cfg.palette.nodata = parse_rgb(*v);

  cfg.validate();
  return cfg;
}

std::string to_ini(const PipelineConfig& c) {
  std::ostringstream out;
  out << "[paths]\n";
  if (!c.vectors.empty()) out << "vectors = " << c.vectors.generic_string() << "\n";
  if (!c.ortho.empty()) out << "ortho = " << c.ortho.generic_string() << "\n";
  out << "dataset = " << c.dataset.generic_string() << "\n";
  out << "checkpoint = " << c.checkpoint.generic_string() << "\n";
  if (!c.class_map.empty()) out << "class_map = " << c.class_map.generic_string() << "\n";
  out << "loss_log = " << c.loss_log.generic_string() << "\n";
  out << "report = " << c.report.generic_string() << "\n";
  out << "confusion = " << c.confusion.generic_string() << "\n";

  out << "\n[vectors]\n";
  out << "class_property = " << c.geojson.class_property << "\n";
  out << "width_property = " << c.geojson.width_property << "\n";
  out << "default_width_m = " << fmt_double(c.geojson.default_width_m) << "\n";
  out << "unknown_policy = " << (c.unknown_policy == geo::UnknownPolicy::error ? "error" : "nodata") << "\n";
  out << "priority = " << join_int(c.priority) << "\n";

  if (c.origin_x || c.origin_y || c.pixel_size) {
    out << "\n[grid]\n";
    if (c.origin_x) out << "origin_x = " << fmt_double(*c.origin_x) << "\n";
    if (c.origin_y) out << "origin_y = " << fmt_double(*c.origin_y) << "\n";
    if (c.pixel_size) out << "pixel_size = " << fmt_double(*c.pixel_size) << "\n";
  }

  out << "\n[tiles]\n";
  out << "tile_px = " << c.tile_px << "\n";
  out << "max_nodata = " << fmt_double(c.max_nodata) << "\n";
  out << "train_fraction = " << fmt_double(c.split.training) << "\n";
  out << "seed = " << c.split.seed << "\n";
  out << "weight_scheme = " << tiles::to_string(c.weight_scheme) << "\n";
  out << "weights = " << join(c.manual_weights) << "\n";

  out << "\n[train]\n";
  out << "crop_size = " << c.train.crop_size << "\n";
  out << "max_steps = " << c.train.max_steps << "\n";
  out << "base_lr = " << fmt_double(c.train.base_lr) << "\n";
  out << "weight_decay = " << fmt_double(c.train.weight_decay) << "\n";
  out << "poly_power = " << fmt_double(c.train.poly_power) << "\n";
  out << "seed = " << c.train.seed << "\n";
  out << "batch_size = " << c.train.batch_size << "\n";
  out << "ignore_index = " << static_cast<int>(c.train.ignore_index) << "\n";
  if (c.train.weights) out << "weights = " << join(c.train.weights->w) << "\n";

  out << "\n[model]\n";
  out << "patch_size = " << c.model.patch_size << "\n";
  out << "window_size = " << c.model.window_size << "\n";
  out << "embed_dim = " << c.model.embed_dim << "\n";
  out << "depths = " << join_int(c.model.depths) << "\n";
  out << "num_heads = " << join_int(c.model.num_heads) << "\n";
  out << "mlp_ratio = " << c.model.mlp_ratio << "\n";
  out << "decoder_channels = " << c.model.decoder_channels << "\n";

  out << "\n[infer]\n";
  out << "window = " << c.infer_window << "\n";
  out << "stride = " << c.infer_stride << "\n";

  out << "\n[palette]\n";
  for (int k = 0; k < geo::kNumClasses; ++k) out << "class" << k << " = " << to_string(c.palette.classes[k]) << "\n";
  out << "nodata = " << to_string(c.palette.nodata) << "\n";
  return out.str();
}

}  // namespace landseg::cli
