#include "landseg/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "landseg/error.hpp"
#include "landseg/swin/ops.hpp"
#include "landseg/train/augment.hpp"
#include "landseg/train/infer.hpp"
#include "landseg/train/loss.hpp"
#include "landseg/train/schedule.hpp"

namespace landseg::train {

void TrainConfig::validate() const {
  if (crop_size <= 0) throw UsageError("train.crop_size must be positive");
  if (max_steps < 1) throw UsageError("train.max_steps must be at least 1");
  if (batch_size < 1) throw UsageError("train.batch_size must be at least 1");
  if (!(base_lr > 0.0) || !std::isfinite(base_lr)) throw UsageError("train.base_lr must be positive");
  if (!(weight_decay >= 0.0)) throw UsageError("train.weight_decay must be non-negative");
  if (!(poly_power > 0.0)) throw UsageError("train.poly_power must be positive");
}

TrainResult train(const std::vector<tiles::DatasetTile>& tiles, const TrainConfig& config,
                  const nn::SwinConfig& model_config, const StepCallback& on_step) {
  config.validate();
  model_config.validate();
  if (tiles.empty()) throw DataError("training split is empty");
  const tiles::WeightVector weights = config.weights.value_or(tiles::WeightVector({1, 1, 1, 1, 1, 1}));

  TrainResult result{nn::SwinSegmenter<float>(model_config, config.seed), {}};
  auto& params = result.model.params();
  AdamW optimizer(AdamWConfig{0.9, 0.999, 1e-8, config.weight_decay});
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ull);

  for (int step = 0; step < config.max_steps; ++step) {
    const double lr = poly_lr(step, config.max_steps, config.base_lr, config.poly_power);
    nn::Tape<float> tape;
    nn::ParamBinder<float> bind(tape, params);
    std::vector<nn::Var> logits;
    std::vector<std::uint8_t> labels;
    for (int b = 0; b < config.batch_size; ++b) {
      const auto& tile = tiles[rng() % tiles.size()];
      Sample s = augment(tile.image, tile.labels, config.crop_size, rng);
      logits.push_back(result.model.forward(bind, tape.constant(image_to_tensor<float>(s.image))));
      labels.insert(labels.end(), s.labels.pixels.begin(), s.labels.pixels.end());
    }
    if (std::all_of(labels.begin(), labels.end(), [&](std::uint8_t y) { return y == config.ignore_index; })) {
      // Crops made entirely of nodata carry no signal; skip the update.
      LossRecord rec{step, lr, 0.0};
      result.log.push_back(rec);
      if (on_step) on_step(rec);
      continue;
    }
    nn::Var batch = nn::stack(tape, logits);
    nn::Var loss = weighted_cross_entropy(tape, batch, std::move(labels), weights, config.ignore_index);
    const double value = tape.value(loss)[0];
    if (!std::isfinite(value)) throw NumericError("loss is not finite at step " + std::to_string(step));
    params.zero_grad();
    tape.backward(loss);
    optimizer.step(params, lr);
    LossRecord rec{step, lr, value};
    result.log.push_back(rec);
    if (on_step) on_step(rec);
  }
  return result;
}

TrainResult train(const std::filesystem::path& dataset_root, const TrainConfig& config,
                  const nn::SwinConfig& model_config, const StepCallback& on_step) {
  TrainConfig cfg = config;
  if (!cfg.weights) cfg.weights = tiles::read_manifest(dataset_root).weights;
  return train(tiles::read_split(dataset_root, tiles::Split::training), cfg, model_config, on_step);
}

void write_loss_log(const std::filesystem::path& path, const std::vector<LossRecord>& log) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write loss log " + path.string());
  char buf[96];
  for (const auto& r : log) {
    std::snprintf(buf, sizeof buf, "%d\t%.9g\t%.9g\n", r.step, r.lr, r.loss);
    out << buf;
  }
  if (!out) throw DataError("cannot write loss log " + path.string());
}

std::vector<LossRecord> read_loss_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read loss log " + path.string());
  std::vector<LossRecord> log;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    LossRecord r;
    if (!(fields >> r.step >> r.lr >> r.loss)) throw DataError("malformed loss log line: " + line);
    log.push_back(r);
  }
  return log;
}

EvalReport evaluate(const nn::SwinSegmenter<float>& model, const std::vector<tiles::DatasetTile>& tiles, int window,
                    int stride, std::uint8_t ignore) {
  if (tiles.empty()) throw DataError("validation split is empty");
  ConfusionMatrix cm;
  for (const auto& tile : tiles) {
    Image8 pred = sliding_infer(model, tile.image, window, stride);
    cm.add(tile.labels.pixels, pred.pixels, ignore);
  }
  return EvalReport::from(cm);
}

EvalReport evaluate(const nn::SwinSegmenter<float>& model, const std::filesystem::path& dataset_root, int window,
                    int stride, std::uint8_t ignore) {
  return evaluate(model, tiles::read_split(dataset_root, tiles::Split::validation), window, stride, ignore);
}

}  // namespace landseg::train
