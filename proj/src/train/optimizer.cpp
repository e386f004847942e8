#include "landseg/train/optimizer.hpp"

#include <cmath>

namespace landseg::train {

void AdamW::step(nn::ParamStore<float>& params, double lr) {
  for (auto& p : params.all()) {
    if (!p.touched) continue;
    State& s = state_[p.name];
    if (s.m.empty()) {
      s.m.assign(p.value.size(), 0.0);
      s.v.assign(p.value.size(), 0.0);
    }
    ++s.t;
    const double bc1 = 1.0 - std::pow(config_.beta1, s.t);
    const double bc2 = 1.0 - std::pow(config_.beta2, s.t);
    const double decay = 1.0 - lr * config_.weight_decay * p.decay_mult;
    auto& w = p.value.storage();
    const auto& g = p.grad.storage();
    for (std::size_t i = 0; i < w.size(); ++i) {
      s.m[i] = config_.beta1 * s.m[i] + (1.0 - config_.beta1) * g[i];
      s.v[i] = config_.beta2 * s.v[i] + (1.0 - config_.beta2) * g[i] * g[i];
      const double update = (s.m[i] / bc1) / (std::sqrt(s.v[i] / bc2) + config_.eps);
      w[i] = static_cast<float>(w[i] * decay - lr * update);
    }
  }
}

}  // namespace landseg::train
