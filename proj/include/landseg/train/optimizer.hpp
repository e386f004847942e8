#pragma once

#include <unordered_map>
#include <vector>

#include "landseg/swin/autograd.hpp"

namespace landseg::train {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

/// Adam with decoupled weight decay. Parameters the last backward pass did not
/// reach (touched == false) are left unchanged, decay included.
class AdamW {
 public:
  explicit AdamW(AdamWConfig config = {}) : config_(config) {}

  void step(nn::ParamStore<float>& params, double lr);

 private:
  struct State {
    std::vector<double> m;
    std::vector<double> v;
    int t = 0;
  };
  AdamWConfig config_;
  std::unordered_map<std::string, State> state_;
};

}  // namespace landseg::train
