#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "landseg/swin/autograd.hpp"
#include "landseg/tensor.hpp"
#include "landseg/tiler/weights.hpp"

namespace landseg::train {

template <typename T>
struct LossResult {
  double loss = 0.0;
  BasicTensor<T> grad;      // d loss / d logits, same shape as logits
  double weight_sum = 0.0;  // sum of w[y] over scored pixels
  std::size_t scored = 0;
};

/// Class-weighted softmax cross entropy over logits [..., K] and one label per
/// pixel. loss = sum_valid w[y] * -log softmax(x)[y] / sum_valid w[y]; pixels
/// labelled `ignore` contribute nothing. Throws DataError when every pixel is
/// ignored or a label is out of range.
template <typename T>
LossResult<T> weighted_cross_entropy(const BasicTensor<T>& logits, std::span<const std::uint8_t> labels,
                                     const tiles::WeightVector& weights, std::uint8_t ignore = 255);

/// Tape op wrapping weighted_cross_entropy; returns a scalar.
template <typename T>
nn::Var weighted_cross_entropy(nn::Tape<T>& tape, nn::Var logits, std::vector<std::uint8_t> labels,
                               const tiles::WeightVector& weights, std::uint8_t ignore = 255);

}  // namespace landseg::train
