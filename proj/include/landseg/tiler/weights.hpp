#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "landseg/geovec/geometry.hpp"
#include "landseg/image_io.hpp"
#include "landseg/tiler/tiles.hpp"

namespace landseg::tiles {

/// Per-class pixel counts with nodata excluded.
struct ClassHistogram {
  std::array<std::uint64_t, geo::kNumClasses> counts{};
  std::uint64_t total = 0;

  void add(const Image8& labels);
  double frequency(int c) const { return total ? static_cast<double>(counts[c]) / static_cast<double>(total) : 0.0; }
};

ClassHistogram class_stats(std::span<const TileRecord> tiles);

/// One strictly positive finite weight per class id.
struct WeightVector {
  std::array<double, geo::kNumClasses> w{};

  WeightVector() = default;
  explicit WeightVector(const std::array<double, geo::kNumClasses>& values);
  double operator[](int c) const { return w[c]; }
};

/// Class weights used for the published model, ordered by class id.
inline constexpr std::array<double, geo::kNumClasses> kPublishedWeights = {0.5,     1.31237, 1.38874,
                                                                           1.39761, 1.5,     1.47807};

enum class WeightScheme { manual, inverse_frequency, median_frequency };

WeightScheme parse_weight_scheme(std::string_view name);
std::string_view to_string(WeightScheme scheme);

/// manual returns `manual_values` verbatim; inverse_frequency gives
/// total / (6 * count); median_frequency gives median(freq) / freq.
WeightVector compute_weights(const ClassHistogram& hist, WeightScheme scheme,
                             std::optional<std::array<double, geo::kNumClasses>> manual_values = std::nullopt);

}  // namespace landseg::tiles
