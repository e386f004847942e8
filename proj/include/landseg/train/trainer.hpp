#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "landseg/swin/model.hpp"
#include "landseg/tiler/dataset.hpp"
#include "landseg/tiler/weights.hpp"
#include "landseg/train/metrics.hpp"
#include "landseg/train/optimizer.hpp"

namespace landseg::train {

struct TrainConfig {
  int crop_size = 64;
  int max_steps = 300;
  double base_lr = 3e-3;
  double weight_decay = 0.01;
  double poly_power = 0.9;
  std::uint64_t seed = 0;
  int batch_size = 4;
  /// Class weights; when unset, the dataset manifest weights are used.
  std::optional<tiles::WeightVector> weights;
  std::uint8_t ignore_index = 255;

  void validate() const;
};

struct LossRecord {
  int step = 0;
  double lr = 0.0;
  double loss = 0.0;
};

struct TrainResult {
  nn::SwinSegmenter<float> model;
  std::vector<LossRecord> log;
};

using StepCallback = std::function<void(const LossRecord&)>;

/// Runs max_steps of forward, weighted loss, backward and AdamW under the
/// poly schedule. Each step draws batch_size tiles with replacement and
/// applies augment(). Deterministic under config.seed. Throws NumericError
/// naming the step when the loss is not finite.
TrainResult train(const std::vector<tiles::DatasetTile>& tiles, const TrainConfig& config,
                  const nn::SwinConfig& model_config, const StepCallback& on_step = {});

/// Trains on the training split of a dataset root.
TrainResult train(const std::filesystem::path& dataset_root, const TrainConfig& config,
                  const nn::SwinConfig& model_config, const StepCallback& on_step = {});

/// `step<TAB>lr<TAB>loss` per line.
void write_loss_log(const std::filesystem::path& path, const std::vector<LossRecord>& log);
std::vector<LossRecord> read_loss_log(const std::filesystem::path& path);

/// Sliding-window prediction on every tile, accumulated into one confusion matrix.
EvalReport evaluate(const nn::SwinSegmenter<float>& model, const std::vector<tiles::DatasetTile>& tiles, int window,
                    int stride = 0, std::uint8_t ignore = 255);
EvalReport evaluate(const nn::SwinSegmenter<float>& model, const std::filesystem::path& dataset_root, int window,
                    int stride = 0, std::uint8_t ignore = 255);

}  // namespace landseg::train
