#pragma once

#include <array>
#include <cstdint>
#include <random>

#include "landseg/image_io.hpp"
#include "landseg/tensor.hpp"

namespace landseg::train {

struct Sample {
  Image8 image;
  Image8 labels;
};

/// Random crop x crop window plus horizontal flip, applied identically to
/// image and labels.
Sample augment(const Image8& image, const Image8& labels, int crop, std::mt19937_64& rng);
Sample augment(const Image8& image, const Image8& labels, int crop, std::uint64_t seed);

/// Per-channel normalization used for every model input.
inline constexpr std::array<float, 3> kImageMean{123.675f, 116.28f, 103.53f};
inline constexpr std::array<float, 3> kImageStd{58.395f, 57.12f, 57.375f};

/// RGB image -> normalized [H, W, 3] tensor.
template <typename T = float>
BasicTensor<T> image_to_tensor(const Image8& image);

}  // namespace landseg::train
