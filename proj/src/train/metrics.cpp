#include "landseg/train/metrics.hpp"

#include <cstdio>

#include "landseg/error.hpp"

namespace landseg::train {

namespace {

constexpr std::array<const char*, geo::kNumClasses> kClassNames = {
    "dense_forest", "sparse_forest", "moor", "herbaceous_formation", "building", "road"};

}  // namespace

void ConfusionMatrix::add(std::span<const std::uint8_t> truth, std::span<const std::uint8_t> predicted,
                          std::uint8_t ignore) {
  if (truth.size() != predicted.size()) throw UsageError("confusion matrix: label maps differ in size");
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const std::uint8_t g = truth[i];
    if (g == ignore) continue;
    const std::uint8_t p = predicted[i];
    if (g >= kClasses || p >= kClasses) throw DataError("confusion matrix: class id out of range");
    ++m_[g][p];
  }
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t n = 0;
  for (const auto& row : m_) {
    for (auto v : row) n += v;
  }
  return n;
}

std::uint64_t ConfusionMatrix::row_sum(int c) const {
  std::uint64_t n = 0;
  for (int p = 0; p < kClasses; ++p) n += m_[c][p];
  return n;
}

std::uint64_t ConfusionMatrix::col_sum(int c) const {
  std::uint64_t n = 0;
  for (int g = 0; g < kClasses; ++g) n += m_[g][c];
  return n;
}

std::optional<ConfusionMatrix::Fraction> ConfusionMatrix::iou_fraction(int c) const {
  const std::uint64_t den = row_sum(c) + col_sum(c) - m_[c][c];
  if (den == 0) return std::nullopt;
  return Fraction{m_[c][c], den};
}

std::optional<double> ConfusionMatrix::iou(int c) const {
  auto f = iou_fraction(c);
  if (!f) return std::nullopt;
  return static_cast<double>(f->num) / static_cast<double>(f->den);
}

double ConfusionMatrix::mean_iou() const {
  double sum = 0.0;
  int n = 0;
  for (int c = 0; c < kClasses; ++c) {
    if (row_sum(c) == 0) continue;
    sum += *iou(c);
    ++n;
  }
  if (n == 0) throw DataError("mIoU undefined: no scored ground-truth pixels");
  return sum / n;
}

double ConfusionMatrix::pixel_accuracy() const {
  const std::uint64_t n = total();
  if (n == 0) throw DataError("pixel accuracy undefined: no scored pixels");
  std::uint64_t hit = 0;
  for (int c = 0; c < kClasses; ++c) hit += m_[c][c];
  return static_cast<double>(hit) / static_cast<double>(n);
}

std::string ConfusionMatrix::to_csv() const {
  std::string out = "truth\\pred";
  for (int p = 0; p < kClasses; ++p) out += "," + std::to_string(p);
  out += "\n";
  for (int g = 0; g < kClasses; ++g) {
    out += std::to_string(g);
    for (int p = 0; p < kClasses; ++p) out += "," + std::to_string(m_[g][p]);
    out += "\n";
  }
  return out;
}

EvalReport EvalReport::from(const ConfusionMatrix& cm) {
  EvalReport r;
  r.confusion = cm;
  for (int c = 0; c < geo::kNumClasses; ++c) r.iou[c] = cm.iou(c);
  r.miou = cm.mean_iou();
  r.accuracy = cm.pixel_accuracy();
  return r;
}

std::string EvalReport::to_text() const {
  std::string out = "class\tname\tIoU\tgt_pixels\n";
  char buf[128];
  for (int c = 0; c < geo::kNumClasses; ++c) {
    const std::uint64_t gt = confusion.row_sum(c);
    if (iou[c] && gt > 0) {
      std::snprintf(buf, sizeof buf, "%d\t%s\t%.4f\t%llu\n", c, kClassNames[c], *iou[c],
                    static_cast<unsigned long long>(gt));
    } else {
      std::snprintf(buf, sizeof buf, "%d\t%s\tn/a\t%llu\n", c, kClassNames[c], static_cast<unsigned long long>(gt));
    }
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "aAcc\t%.4f\nmIoU\t%.4f\n", accuracy, miou);
  out += buf;
  return out;
}

}  // namespace landseg::train
