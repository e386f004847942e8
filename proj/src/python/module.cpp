#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>
#include <sstream>

#include "landseg/cli/commands.hpp"
#include "landseg/cli/config.hpp"
#include "landseg/cli/fixture.hpp"
#include "landseg/cli/palette.hpp"
#include "landseg/error.hpp"
#include "landseg/geovec/class_map.hpp"
#include "landseg/geovec/geojson.hpp"
#include "landseg/geovec/raster.hpp"
#include "landseg/swin/checkpoint.hpp"
#include "landseg/tiler/tiles.hpp"
#include "landseg/tiler/weights.hpp"
#include "landseg/train/augment.hpp"
#include "landseg/train/infer.hpp"
#include "landseg/train/loss.hpp"
#include "landseg/train/metrics.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;
using namespace landseg;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using F32Array = py::array_t<float, py::array::c_style | py::array::forcecast>;
using F64Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// (H, W) or (H, W, C) uint8 array -> Image8.
Image8 to_image(const U8Array& a) {
  if (a.ndim() != 2 && a.ndim() != 3) throw UsageError("image must be a 2-D or 3-D uint8 array");
  const int c = a.ndim() == 3 ? static_cast<int>(a.shape(2)) : 1;
  Image8 im(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)), c);
  std::memcpy(im.pixels.data(), a.data(), im.pixels.size());
  return im;
}

U8Array from_image(const Image8& im) {
  std::vector<py::ssize_t> shape = {im.height, im.width};
  if (im.channels > 1) shape.push_back(im.channels);
  U8Array a(shape);
  std::memcpy(a.mutable_data(), im.pixels.data(), im.pixels.size());
  return a;
}

U8Array from_raster(const geo::LabelRaster& r) {
  U8Array a({r.grid.height, r.grid.width});
  std::memcpy(a.mutable_data(), r.data.data(), r.data.size());
  return a;
}

template <typename T, typename A>
BasicTensor<T> to_tensor(const A& a) {
  Shape shape;
  for (py::ssize_t d = 0; d < a.ndim(); ++d) shape.push_back(static_cast<int>(a.shape(d)));
  BasicTensor<T> t(shape);
  std::memcpy(t.storage().data(), a.data(), t.size() * sizeof(T));
  return t;
}

template <typename T>
py::array_t<T> from_tensor(const BasicTensor<T>& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  py::array_t<T> a(shape);
  std::memcpy(a.mutable_data(), t.storage().data(), t.size() * sizeof(T));
  return a;
}

std::span<const std::uint8_t> bytes(const U8Array& a) { return {a.data(), static_cast<std::size_t>(a.size())}; }

tiles::WeightVector weight_vector(const std::array<double, geo::kNumClasses>& w) { return tiles::WeightVector(w); }

cli::PipelineConfig config_of(const std::optional<fs::path>& file, const std::vector<std::string>& overrides) {
  return cli::load_config(file, overrides);
}

// Runs a pipeline command and returns what it printed.
template <typename Fn>
std::string captured(Fn&& fn) {
  std::ostringstream out;
  py::gil_scoped_release release;
  fn(out);
  return out.str();
}

class Segmenter {
 public:
  explicit Segmenter(const fs::path& checkpoint) : model_(load(checkpoint)) {}
  Segmenter(const std::string& preset, std::uint64_t seed)
      : model_(preset == "tiny"      ? nn::SwinConfig::tiny()
               : preset == "default" ? nn::SwinConfig{}
                                     : throw UsageError("preset must be tiny or default"),
               seed) {}

  // (H, W, 3) float input, already normalized -> (H, W, K) logits.
  py::array_t<float> logits(const F32Array& image) const {
    const Tensor x = to_tensor<float>(image);
    Tensor y;
    {
      py::gil_scoped_release release;
      y = model_.infer(x);
    }
    return from_tensor(y);
  }

  U8Array predict(const U8Array& rgb, int window, int stride) const {
    const Image8 im = to_image(rgb);
    Image8 labels;
    {
      py::gil_scoped_release release;
      labels = train::sliding_infer(model_, im, window, stride);
    }
    return from_image(labels);
  }

  void save(const fs::path& path) const { nn::save_checkpoint(path, model_.config(), model_.params()); }
  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : model_.params().all()) n += p.value.size();
    return n;
  }

 private:
  static nn::SwinSegmenter<float> load(const fs::path& path) {
    auto ckpt = nn::load_checkpoint(path);
    return nn::SwinSegmenter<float>(ckpt.config, std::move(ckpt.params));
  }

  nn::SwinSegmenter<float> model_;
};

}  // namespace

PYBIND11_MODULE(_landseg, m) {
  m.doc() = "Land-cover segmentation: vector rasterization, tiling, Swin-UPerNet training and evaluation";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<UsageError>(m, "UsageError", base.ptr());

  m.attr("NUM_CLASSES") = geo::kNumClasses;
  m.attr("NODATA") = static_cast<int>(geo::kNodata);
  m.attr("PUBLISHED_WEIGHTS") = tiles::kPublishedWeights;

  m.def(
      "rasterize",
      [](const std::string& geojson, double origin_x, double origin_y, double pixel_size, int width, int height,
         std::optional<fs::path> class_map, const std::string& unknown_policy) {
        if (unknown_policy != "error" && unknown_policy != "nodata") {
          throw UsageError("unknown_policy must be error or nodata");
        }
        const auto policy = unknown_policy == "error" ? geo::UnknownPolicy::error : geo::UnknownPolicy::nodata;
        auto map = class_map ? geo::load_class_map(*class_map, policy) : geo::default_class_map();
        map.unknown_policy = policy;
        const auto features = geo::apply_class_map(geo::parse_feature_collection(geojson), map);
        return from_raster(geo::rasterize(features, {origin_x, origin_y, pixel_size, width, height}));
      },
      py::arg("geojson"), py::arg("origin_x"), py::arg("origin_y"), py::arg("pixel_size"), py::arg("width"),
      py::arg("height"), py::arg("class_map") = py::none(), py::arg("unknown_policy") = "error",
      "Label raster (H, W) of class ids, 255 where no feature covers the pixel center.");

  m.def("nodata_fraction", [](const U8Array& labels) { return tiles::nodata_fraction(to_image(labels)); });

  m.def(
      "cut_tiles",
      [](const U8Array& image, const U8Array& labels, double origin_x, double origin_y, double pixel_size,
         int tile_px, double max_nodata) {
        const Image8 im = to_image(image);
        const Image8 lab = to_image(labels);
        if (lab.channels != 1 || lab.width != im.width || lab.height != im.height) {
          throw UsageError("labels must be (H, W) and match the image");
        }
        geo::LabelRaster raster({origin_x, origin_y, pixel_size, im.width, im.height});
        raster.data.assign(lab.pixels.begin(), lab.pixels.end());
        py::list out;
        for (const auto& t : tiles::filter_tiles(tiles::cut_tiles(im, raster, tile_px), max_nodata)) {
          out.append(py::make_tuple(t.tile_id, from_image(t.image), from_image(t.labels), t.nodata_fraction));
        }
        return out;
      },
      py::arg("image"), py::arg("labels"), py::arg("origin_x"), py::arg("origin_y"), py::arg("pixel_size") = 0.5,
      py::arg("tile_px") = 1000, py::arg("max_nodata") = 0.5,
      "Kept tiles as (tile_id, image, labels, nodata_fraction) tuples.");

  m.def(
      "compute_weights",
      [](const std::array<std::uint64_t, geo::kNumClasses>& counts, const std::string& scheme,
         std::optional<std::array<double, geo::kNumClasses>> manual) {
        tiles::ClassHistogram h;
        h.counts = counts;
        for (auto c : counts) h.total += c;
        const auto s = tiles::parse_weight_scheme(scheme);
        if (s == tiles::WeightScheme::manual && !manual) manual = tiles::kPublishedWeights;
        return tiles::compute_weights(h, s, manual).w;
      },
      py::arg("counts"), py::arg("scheme") = "manual", py::arg("manual") = py::none());

  m.def(
      "weighted_cross_entropy",
      [](const F64Array& logits, const U8Array& labels, const std::array<double, geo::kNumClasses>& weights,
         int ignore) {
        const auto r = train::weighted_cross_entropy(to_tensor<double>(logits), bytes(labels), weight_vector(weights),
                                                     static_cast<std::uint8_t>(ignore));
        return py::make_tuple(r.loss, from_tensor(r.grad));
      },
      py::arg("logits"), py::arg("labels"), py::arg("weights") = tiles::kPublishedWeights, py::arg("ignore") = 255,
      "Weighted mean cross entropy over non-ignored pixels and its gradient w.r.t. the logits.");

  m.def(
      "evaluate_labels",
      [](const U8Array& truth, const U8Array& predicted, int ignore) {
        if (truth.size() != predicted.size()) throw UsageError("label maps differ in size");
        train::ConfusionMatrix cm;
        cm.add(bytes(truth), bytes(predicted), static_cast<std::uint8_t>(ignore));
        const auto report = train::EvalReport::from(cm);
        py::array_t<std::uint64_t> matrix({geo::kNumClasses, geo::kNumClasses});
        auto mv = matrix.mutable_unchecked<2>();
        for (int g = 0; g < geo::kNumClasses; ++g) {
          for (int p = 0; p < geo::kNumClasses; ++p) mv(g, p) = cm.at(g, p);
        }
        py::dict d;
        d["confusion"] = matrix;
        d["iou"] = report.iou;
        d["miou"] = report.miou;
        d["accuracy"] = report.accuracy;
        return d;
      },
      py::arg("truth"), py::arg("predicted"), py::arg("ignore") = 255);

  m.def(
      "colorize", [](const U8Array& labels) { return from_image(cli::colorize(to_image(labels), cli::Palette::standard())); },
      "Class ids (H, W) -> standard palette colors (H, W, 3).");
  m.def(
      "decolorize", [](const U8Array& rgb) { return from_image(cli::decolorize(to_image(rgb), cli::Palette::standard())); },
      "Standard palette colors (H, W, 3) -> class ids (H, W).");

  m.def(
      "image_to_input", [](const U8Array& rgb) { return from_tensor(train::image_to_tensor<float>(to_image(rgb))); },
      "Normalized float input (H, W, 3) as fed to the model.");

  py::class_<Segmenter>(m, "Segmenter")
      .def(py::init<const fs::path&>(), py::arg("checkpoint"))
      .def(py::init<const std::string&, std::uint64_t>(), py::arg("preset"), py::arg("seed") = 0)
      .def("logits", &Segmenter::logits, py::arg("image"))
      .def("predict", &Segmenter::predict, py::arg("image"), py::arg("window") = 384, py::arg("stride") = 0)
      .def("save", &Segmenter::save, py::arg("path"))
      .def_property_readonly("parameter_count", &Segmenter::parameter_count);

  m.def(
      "write_fixture",
      [](const fs::path& dir, int tiles_x, int tiles_y, int tile_px, bool full_cover, std::uint64_t seed) {
        cli::FixtureOptions fo;
        fo.tiles_x = tiles_x;
        fo.tiles_y = tiles_y;
        fo.tile_px = tile_px;
        fo.sparse_last_tile = !full_cover;
        fo.seed = seed;
        cli::write_fixture(dir, fo);
      },
      py::arg("dir"), py::arg("tiles_x") = 3, py::arg("tiles_y") = 2, py::arg("tile_px") = 1000,
      py::arg("full_cover") = false, py::arg("seed") = 11,
      "Synthetic vectors, ortho and landseg.ini for a quick end-to-end run.");

  using Overrides = std::vector<std::string>;
  const auto cfg_arg = py::arg("config") = py::none();
  const auto set_arg = py::arg("overrides") = Overrides{};
  m.def(
      "prepare",
      [](std::optional<fs::path> config, const Overrides& set) {
        const auto cfg = config_of(config, set);
        return captured([&](std::ostream& out) { cli::cmd_prepare(cfg, out); });
      },
      cfg_arg, set_arg);
  m.def(
      "stats",
      [](std::optional<fs::path> config, const Overrides& set, std::optional<std::string> scheme) {
        const auto cfg = config_of(config, set);
        std::optional<tiles::WeightScheme> s;
        if (scheme) s = tiles::parse_weight_scheme(*scheme);
        return captured([&](std::ostream& out) { cli::cmd_stats(cfg, s, out); });
      },
      cfg_arg, set_arg, py::arg("scheme") = py::none());
  m.def(
      "train",
      [](std::optional<fs::path> config, const Overrides& set) {
        const auto cfg = config_of(config, set);
        return captured([&](std::ostream& out) { cli::cmd_train(cfg, out); });
      },
      cfg_arg, set_arg);
  m.def(
      "evaluate",
      [](std::optional<fs::path> config, const Overrides& set, std::optional<fs::path> predictions) {
        const auto cfg = config_of(config, set);
        return captured([&](std::ostream& out) { cli::cmd_eval(cfg, predictions, out); });
      },
      cfg_arg, set_arg, py::arg("predictions") = py::none());
  m.def(
      "infer",
      [](const fs::path& input, const fs::path& output, std::optional<fs::path> config, const Overrides& set) {
        const auto cfg = config_of(config, set);
        return captured([&](std::ostream& out) { cli::cmd_infer(cfg, input, output, out); });
      },
      py::arg("input"), py::arg("output"), cfg_arg, set_arg);
  m.def(
      "colorize_file",
      [](const fs::path& input, const fs::path& output, bool inverse, std::optional<fs::path> config,
         const Overrides& set) {
        const auto cfg = config_of(config, set);
        return captured([&](std::ostream& out) { cli::cmd_colorize(cfg, input, output, inverse, out); });
      },
      py::arg("input"), py::arg("output"), py::arg("inverse") = false, cfg_arg, set_arg);
}
