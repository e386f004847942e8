#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "landseg/cli/config.hpp"

namespace landseg::cli {

/// vectors + ortho -> dataset tree and manifest. Prints kept and dropped tiles.
void cmd_prepare(const PipelineConfig& config, std::ostream& out);

/// Per-class pixel counts, frequencies and weights over every dataset tile.
void cmd_stats(const PipelineConfig& config, std::optional<tiles::WeightScheme> scheme, std::ostream& out);

/// Trains on the training split; writes the checkpoint and loss log.
void cmd_train(const PipelineConfig& config, std::ostream& out);

/// Scores the validation split with the checkpoint, or with precomputed
/// `<tile_id>.png` label maps from predictions_dir when given.
void cmd_eval(const PipelineConfig& config, const std::optional<std::filesystem::path>& predictions_dir,
              std::ostream& out);

/// Sliding-window prediction of one RGB image into a label image.
void cmd_infer(const PipelineConfig& config, const std::filesystem::path& input, const std::filesystem::path& output,
               std::ostream& out);

/// Label image -> palette colors, or the inverse.
void cmd_colorize(const PipelineConfig& config, const std::filesystem::path& input,
                  const std::filesystem::path& output, bool inverse, std::ostream& out);

/// Runs fn, prefixing any error message with the stage name.
template <typename Fn>
auto run_stage(const std::string& stage, Fn&& fn) -> decltype(fn());

}  // namespace landseg::cli

#include "landseg/cli/stage.ipp"
