#include "landseg/train/augment.hpp"

#include "landseg/error.hpp"

namespace landseg::train {

Sample augment(const Image8& image, const Image8& labels, int crop, std::mt19937_64& rng) {
  if (image.width != labels.width || image.height != labels.height) {
    throw DataError("augment: image and labels differ in size");
  }
  if (crop <= 0 || crop > image.width || crop > image.height) {
    throw DataError("augment: crop " + std::to_string(crop) + " larger than tile " + std::to_string(image.width) +
                    "x" + std::to_string(image.height));
  }
  const int y0 = static_cast<int>(rng() % static_cast<std::uint64_t>(image.height - crop + 1));
  const int x0 = static_cast<int>(rng() % static_cast<std::uint64_t>(image.width - crop + 1));
  const bool flip = (rng() & 1u) != 0;
  Sample out{Image8(crop, crop, image.channels), Image8(crop, crop, labels.channels)};
  for (int r = 0; r < crop; ++r) {
    for (int c = 0; c < crop; ++c) {
      const int sc = x0 + (flip ? crop - 1 - c : c);
      for (int ch = 0; ch < image.channels; ++ch) out.image.at(r, c, ch) = image.at(y0 + r, sc, ch);
      for (int ch = 0; ch < labels.channels; ++ch) out.labels.at(r, c, ch) = labels.at(y0 + r, sc, ch);
    }
  }
  return out;
}

Sample augment(const Image8& image, const Image8& labels, int crop, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return augment(image, labels, crop, rng);
}

template <typename T>
BasicTensor<T> image_to_tensor(const Image8& image) {
  if (image.channels != 3) throw DataError("model input must be a 3-channel image");
  BasicTensor<T> t({image.height, image.width, 3});
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    const int ch = static_cast<int>(i % 3);
    t[i] = static_cast<T>((static_cast<float>(image.pixels[i]) - kImageMean[ch]) / kImageStd[ch]);
  }
  return t;
}

template BasicTensor<float> image_to_tensor<float>(const Image8&);
template BasicTensor<double> image_to_tensor<double>(const Image8&);

}  // namespace landseg::train
