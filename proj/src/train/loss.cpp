#include "landseg/train/loss.hpp"

#include <cmath>
#include <memory>

namespace landseg::train {

template <typename T>
LossResult<T> weighted_cross_entropy(const BasicTensor<T>& logits, std::span<const std::uint8_t> labels,
                                     const tiles::WeightVector& weights, std::uint8_t ignore) {
  const int k = logits.dim(-1);
  if (k != geo::kNumClasses) throw UsageError("weighted_cross_entropy expects 6 class logits");
  const std::size_t pixels = logits.size() / k;
  if (labels.size() != pixels) {
    throw UsageError("weighted_cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(pixels) + " pixels");
  }
  LossResult<T> out;
  out.grad = BasicTensor<T>(logits.shape(), T(0));
  double total = 0.0;
  std::vector<double> prob(k);
  for (std::size_t p = 0; p < pixels; ++p) {
    const std::uint8_t y = labels[p];
    if (y == ignore) continue;
    if (y >= k) throw DataError("label " + std::to_string(y) + " out of range");
    const T* x = logits.ptr() + p * k;
    double mx = x[0];
    for (int c = 1; c < k; ++c) mx = std::max(mx, static_cast<double>(x[c]));
    double z = 0.0;
    for (int c = 0; c < k; ++c) {
      prob[c] = std::exp(static_cast<double>(x[c]) - mx);
      z += prob[c];
    }
    const double w = weights[y];
    total += w * (mx + std::log(z) - static_cast<double>(x[y]));
    out.weight_sum += w;
    ++out.scored;
    T* g = out.grad.ptr() + p * k;
    for (int c = 0; c < k; ++c) g[c] = static_cast<T>(w * (prob[c] / z - (c == y ? 1.0 : 0.0)));
  }
  if (out.scored == 0) throw DataError("every pixel is ignored; the weighted mean loss is undefined");
  out.loss = total / out.weight_sum;
  const T inv = static_cast<T>(1.0 / out.weight_sum);
  for (auto& g : out.grad.storage()) g *= inv;
  return out;
}

template <typename T>
nn::Var weighted_cross_entropy(nn::Tape<T>& tape, nn::Var logits, std::vector<std::uint8_t> labels,
                               const tiles::WeightVector& weights, std::uint8_t ignore) {
  auto result = std::make_shared<LossResult<T>>(weighted_cross_entropy(tape.value(logits), labels, weights, ignore));
  BasicTensor<T> value({1}, static_cast<T>(result->loss));
  return tape.push_op(std::move(value), {logits}, [logits, result](nn::Tape<T>& t, nn::Var self) {
    const T g = t.grad(self)[0];
    BasicTensor<T>& dx = t.grad_buffer(logits);
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += g * result->grad[i];
  });
}

template LossResult<float> weighted_cross_entropy<float>(const Tensor&, std::span<const std::uint8_t>,
                                                         const tiles::WeightVector&, std::uint8_t);
template LossResult<double> weighted_cross_entropy<double>(const BasicTensor<double>&, std::span<const std::uint8_t>,
                                                           const tiles::WeightVector&, std::uint8_t);
template nn::Var weighted_cross_entropy<float>(nn::Tape<float>&, nn::Var, std::vector<std::uint8_t>,
                                               const tiles::WeightVector&, std::uint8_t);
template nn::Var weighted_cross_entropy<double>(nn::Tape<double>&, nn::Var, std::vector<std::uint8_t>,
                                                const tiles::WeightVector&, std::uint8_t);

}  // namespace landseg::train
