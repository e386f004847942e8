#pragma once

namespace landseg::train {

/// base_lr * (1 - step / max_steps)^power for 0 <= step <= max_steps.
double poly_lr(int step, int max_steps, double base_lr, double power = 0.9);

}  // namespace landseg::train
