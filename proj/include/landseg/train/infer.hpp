#pragma once

#include <functional>

#include "landseg/image_io.hpp"
#include "landseg/swin/model.hpp"
#include "landseg/tensor.hpp"

namespace landseg::train {

/// Maps an input window [h, w, 3] to logits [h, w, K].
using LogitFn = std::function<Tensor(const Tensor&)>;

LogitFn model_logits(const nn::SwinSegmenter<float>& model);

/// Window origins along one axis: ceil((size - window) / stride) + 1 steps,
/// the last window clamped to end at the border.
std::vector<int> window_starts(int size, int window, int stride);

/// Logits [H, W, K] averaged over all overlapping windows.
Tensor sliding_logits(const LogitFn& fn, const Tensor& image, int window, int stride);

/// Argmax over the last axis; ties resolve to the lowest class id.
Image8 argmax_labels(const Tensor& logits);

/// Sliding-window prediction; stride defaults to window / 2.
Image8 sliding_infer(const LogitFn& fn, const Image8& image, int window, int stride = 0);
Image8 sliding_infer(const nn::SwinSegmenter<float>& model, const Image8& image, int window, int stride = 0);

}  // namespace landseg::train
