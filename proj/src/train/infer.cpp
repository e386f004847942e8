#include "landseg/train/infer.hpp"

#include <algorithm>

#include "landseg/error.hpp"
#include "landseg/train/augment.hpp"

namespace landseg::train {

LogitFn model_logits(const nn::SwinSegmenter<float>& model) {
  return [&model](const Tensor& window) { return model.infer(window); };
}

std::vector<int> window_starts(int size, int window, int stride) {
  if (window <= 0 || stride <= 0) throw UsageError("sliding window and stride must be positive");
  if (stride > window) throw UsageError("sliding stride must not exceed the window");
  const int steps = std::max(size - window + stride - 1, 0) / stride + 1;
  std::vector<int> starts;
  for (int i = 0; i < steps; ++i) {
    const int end = std::min(i * stride + window, size);
    starts.push_back(std::max(end - window, 0));
  }
  return starts;
}

Tensor sliding_logits(const LogitFn& fn, const Tensor& image, int window, int stride) {
  if (image.rank() != 3) throw UsageError("sliding inference expects an [H, W, C] image");
  const int H = image.dim(0), W = image.dim(1), C = image.dim(2);
  const int wh = std::min(window, H), ww = std::min(window, W);
  Tensor sum;
  std::vector<int> count(static_cast<std::size_t>(H) * W, 0);
  int K = 0;
  for (int y0 : window_starts(H, window, stride)) {
    for (int x0 : window_starts(W, window, stride)) {
      Tensor crop({wh, ww, C});
      for (int r = 0; r < wh; ++r) {
        const float* src = image.ptr() + (static_cast<std::size_t>(y0 + r) * W + x0) * C;
        std::copy(src, src + static_cast<std::size_t>(ww) * C, crop.ptr() + static_cast<std::size_t>(r) * ww * C);
      }
      Tensor logits = fn(crop);
      if (logits.rank() != 3 || logits.dim(0) != wh || logits.dim(1) != ww) {
        throw UsageError("logit function returned " + shape_string(logits.shape()));
      }
      if (sum.empty()) {
        K = logits.dim(2);
        sum = Tensor({H, W, K}, 0.0f);
      }
      for (int r = 0; r < wh; ++r) {
        for (int c = 0; c < ww; ++c) {
          const std::size_t p = static_cast<std::size_t>(y0 + r) * W + x0 + c;
          ++count[p];
          const float* l = logits.ptr() + (static_cast<std::size_t>(r) * ww + c) * K;
          float* s = sum.ptr() + p * K;
          for (int k = 0; k < K; ++k) s[k] += l[k];
        }
      }
    }
  }
  for (std::size_t p = 0; p < count.size(); ++p) {
    const float inv = 1.0f / static_cast<float>(count[p]);
    for (int k = 0; k < K; ++k) sum[p * K + k] *= inv;
  }
  return sum;
}

Image8 argmax_labels(const Tensor& logits) {
  if (logits.rank() != 3) throw UsageError("argmax expects [H, W, K] logits");
  const int H = logits.dim(0), W = logits.dim(1), K = logits.dim(2);
  Image8 out(W, H, 1);
  for (std::size_t p = 0; p < out.pixels.size(); ++p) {
    const float* l = logits.ptr() + p * K;
    int best = 0;
    for (int k = 1; k < K; ++k) {
      if (l[k] > l[best]) best = k;
    }
    out.pixels[p] = static_cast<std::uint8_t>(best);
  }
  return out;
}

Image8 sliding_infer(const LogitFn& fn, const Image8& image, int window, int stride) {
  if (stride == 0) stride = std::max(window / 2, 1);
  return argmax_labels(sliding_logits(fn, image_to_tensor<float>(image), window, stride));
}

Image8 sliding_infer(const nn::SwinSegmenter<float>& model, const Image8& image, int window, int stride) {
  return sliding_infer(model_logits(model), image, window, stride);
}

}  // namespace landseg::train
