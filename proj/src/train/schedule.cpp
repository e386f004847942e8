#include "landseg/train/schedule.hpp"

#include <cmath>
#include <string>

#include "landseg/error.hpp"

namespace landseg::train {

double poly_lr(int step, int max_steps, double base_lr, double power) {
  if (max_steps < 1 || step < 0 || step > max_steps) {
    throw UsageError("poly_lr: step " + std::to_string(step) + " outside [0, " + std::to_string(max_steps) + "]");
  }
  return base_lr * std::pow(1.0 - static_cast<double>(step) / max_steps, power);
}

}  // namespace landseg::train
