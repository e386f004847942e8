#include "landseg/tiler/weights.hpp"

#include <algorithm>
#include <cmath>

#include "landseg/error.hpp"

namespace landseg::tiles {

void ClassHistogram::add(const Image8& labels) {
  for (std::uint8_t v : labels.pixels) {
    if (v < geo::kNumClasses) {
      ++counts[v];
      ++total;
    }
  }
}

ClassHistogram class_stats(std::span<const TileRecord> tiles) {
  if (tiles.empty()) throw UsageError("class_stats needs at least one tile");
  ClassHistogram hist;
  for (const auto& t : tiles) hist.add(t.labels);
  return hist;
}

WeightVector::WeightVector(const std::array<double, geo::kNumClasses>& values) : w(values) {
  for (double v : w) {
    if (!(v > 0.0) || !std::isfinite(v)) throw UsageError("class weights must be positive and finite");
  }
}

WeightScheme parse_weight_scheme(std::string_view name) {
  if (name == "manual") return WeightScheme::manual;
  if (name == "inverse_frequency") return WeightScheme::inverse_frequency;
  if (name == "median_frequency") return WeightScheme::median_frequency;
  throw UsageError("unknown weight scheme '" + std::string(name) + "'");
}

std::string_view to_string(WeightScheme scheme) {
  switch (scheme) {
    case WeightScheme::manual:
      return "manual";
    case WeightScheme::inverse_frequency:
      return "inverse_frequency";
    case WeightScheme::median_frequency:
      return "median_frequency";
  }
  return "unknown";
}

WeightVector compute_weights(const ClassHistogram& hist, WeightScheme scheme,
                             std::optional<std::array<double, geo::kNumClasses>> manual_values) {
  if (scheme == WeightScheme::manual) {
    if (!manual_values) throw UsageError("manual weight scheme requires 6 values");
    return WeightVector(*manual_values);
  }
  if (hist.total == 0) throw DataError("cannot derive class weights from an empty histogram");
  for (int c = 0; c < geo::kNumClasses; ++c) {
    if (hist.counts[c] == 0) {
      throw DataError("class " + std::to_string(c) + " has zero pixels; frequency weights are undefined");
    }
  }

  std::array<double, geo::kNumClasses> w{};
  const double total = static_cast<double>(hist.total);
  if (scheme == WeightScheme::inverse_frequency) {
    for (int c = 0; c < geo::kNumClasses; ++c) {
      w[c] = total / (geo::kNumClasses * static_cast<double>(hist.counts[c]));
    }
  } else {
    std::array<double, geo::kNumClasses> freq{};
    for (int c = 0; c < geo::kNumClasses; ++c) freq[c] = static_cast<double>(hist.counts[c]) / total;
    auto sorted = freq;
    std::sort(sorted.begin(), sorted.end());
    const double median = 0.5 * (sorted[2] + sorted[3]);
    for (int c = 0; c < geo::kNumClasses; ++c) w[c] = median / freq[c];
  }
  return WeightVector(w);
}

}  // namespace landseg::tiles
