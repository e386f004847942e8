#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "landseg/geovec/geometry.hpp"

namespace landseg::train {

/// m[g][p] counts pixels with ground truth g predicted as p.
class ConfusionMatrix {
 public:
  static constexpr int kClasses = geo::kNumClasses;

  struct Fraction {
    std::uint64_t num = 0;
    std::uint64_t den = 0;
  };

  void add(std::span<const std::uint8_t> truth, std::span<const std::uint8_t> predicted,
           std::uint8_t ignore = geo::kNodata);

  std::uint64_t at(int truth, int predicted) const { return m_[truth][predicted]; }
  std::uint64_t total() const;
  std::uint64_t row_sum(int c) const;
  std::uint64_t col_sum(int c) const;

  /// Intersection over union as an exact fraction; nullopt when the class is
  /// absent from both truth and prediction.
  std::optional<Fraction> iou_fraction(int c) const;
  std::optional<double> iou(int c) const;
  /// Mean IoU over classes present in the ground truth.
  double mean_iou() const;
  double pixel_accuracy() const;

  /// Header row `truth\pred,0..5` then one row per ground-truth class.
  std::string to_csv() const;

 private:
  std::array<std::array<std::uint64_t, kClasses>, kClasses> m_{};
};

struct EvalReport {
  ConfusionMatrix confusion;
  std::array<std::optional<double>, geo::kNumClasses> iou{};
  double miou = 0.0;
  double accuracy = 0.0;

  static EvalReport from(const ConfusionMatrix& cm);
  /// Per-class IoU table followed by the mIoU line.
  std::string to_text() const;
};

}  // namespace landseg::train
