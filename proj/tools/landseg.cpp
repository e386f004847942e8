// Command-line entry point: landseg <subcommand> --config <file> [--set section.key=value ...]

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <optional>

#include "landseg/cli/commands.hpp"
#include "landseg/cli/fixture.hpp"

namespace fs = std::filesystem;
using namespace landseg;

namespace {

int fail(int code, const std::string& what) {
  std::string line = what;
  for (auto& ch : line) {
    if (ch == '\n') ch = ' ';
  }
  std::fprintf(stderr, "landseg: error: %s\n", line.c_str());
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Land-cover segmentation toolkit"};
  app.require_subcommand(1);

  std::optional<std::string> config_file;
  std::vector<std::string> overrides;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("-c,--config", config_file, "INI configuration file");
    cmd->add_option("-s,--set", overrides, "Override a config value: section.key=value")->take_all();
  };

  auto* prepare = app.add_subcommand("prepare", "Rasterize vectors, cut tiles and write the dataset tree");
  add_common(prepare);

  auto* stats = app.add_subcommand("stats", "Class histogram and class weights of the dataset");
  add_common(stats);
  std::optional<std::string> scheme;
  stats->add_option("--scheme", scheme, "manual | inverse_frequency | median_frequency");

  auto* train = app.add_subcommand("train", "Train the segmenter on the training split");
  add_common(train);

  auto* eval = app.add_subcommand("eval", "Per-class IoU and mIoU on the validation split");
  add_common(eval);
  std::optional<std::string> predictions;
  eval->add_option("--predictions", predictions, "Directory of <tile_id>.png label maps to score instead of the model");

  auto* infer = app.add_subcommand("infer", "Sliding-window prediction of an RGB image");
  add_common(infer);
  std::string infer_in, infer_out;
  infer->add_option("-i,--input", infer_in, "RGB image")->required();
  infer->add_option("-o,--output", infer_out, "Output label image")->required();

  auto* colorize = app.add_subcommand("colorize", "Map class ids to palette colors (or back with --inverse)");
  add_common(colorize);
  std::string color_in, color_out;
  bool inverse = false;
  colorize->add_option("-i,--input", color_in, "Input image")->required();
  colorize->add_option("-o,--output", color_out, "Output image")->required();
  colorize->add_flag("--inverse", inverse, "Convert palette colors back to class ids");

  auto* fixture = app.add_subcommand("fixture", "Write the synthetic demo inputs and a matching config");
  std::string fixture_dir;
  cli::FixtureOptions fopts;
  fixture->add_option("-o,--output", fixture_dir, "Output directory")->required();
  fixture->add_option("--tiles-x", fopts.tiles_x, "Tiles across")->capture_default_str();
  fixture->add_option("--tiles-y", fopts.tiles_y, "Tiles down")->capture_default_str();
  fixture->add_option("--tile-px", fopts.tile_px, "Tile size in pixels")->capture_default_str();
  fixture->add_option("--seed", fopts.seed, "Noise seed")->capture_default_str();
  bool full_cover = false;
  fixture->add_flag("--full-cover", full_cover, "Cover every tile with vector data");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (fixture->parsed()) {
      fopts.sparse_last_tile = !full_cover;
      cli::run_stage("fixture", [&] { cli::write_fixture(fixture_dir, fopts); });
      std::cout << "fixture: " << fixture_dir << "\n";
      return 0;
    }
    const auto config = cli::run_stage("config", [&] {
      return cli::load_config(config_file ? std::optional<fs::path>(*config_file) : std::nullopt, overrides);
    });
    if (prepare->parsed()) {
      cli::cmd_prepare(config, std::cout);
    } else if (stats->parsed()) {
      std::optional<tiles::WeightScheme> s;
      if (scheme) s = cli::run_stage("config", [&] { return tiles::parse_weight_scheme(*scheme); });
      cli::cmd_stats(config, s, std::cout);
    } else if (train->parsed()) {
      cli::cmd_train(config, std::cout);
    } else if (eval->parsed()) {
      cli::cmd_eval(config, predictions ? std::optional<fs::path>(*predictions) : std::nullopt, std::cout);
    } else if (infer->parsed()) {
      cli::cmd_infer(config, infer_in, infer_out, std::cout);
    } else if (colorize->parsed()) {
      cli::cmd_colorize(config, color_in, color_out, inverse, std::cout);
    }
  } catch (const UsageError& e) {
    return fail(1, e.what());
  } catch (const DataError& e) {
    return fail(2, e.what());
  } catch (const NumericError& e) {
    return fail(3, e.what());
  } catch (const std::exception& e) {
    return fail(2, e.what());
  }
  return 0;
}
