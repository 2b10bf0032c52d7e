#pragma once

#include <algorithm>
#include <string>

#include "hyperlora/param_vector.hpp"

namespace hyperlora {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  Vec m;
  Vec v;
  long t = 0;

  explicit AdamState(std::ptrdiff_t n = 0) : m(Vec::Zero(n)), v(Vec::Zero(n)) {}
};

/// Textbook Adam update with bias correction, in place.
inline void adam_step(Vec& params, const Vec& grad, AdamState& state, double lr,
                      const AdamConfig& cfg = {}) {
  if (params.size() != grad.size() || params.size() != state.m.size()) {
    throw ShapeError("adam_step: size mismatch");
  }
  for (std::ptrdiff_t i = 0; i < grad.size(); ++i) {
    if (!std::isfinite(grad[i])) {
      throw NumericError("adam_step: non-finite gradient at offset " + std::to_string(i));
    }
  }
  state.t += 1;
  state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grad;
  state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  params.array() -=
      lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + cfg.eps);
}

enum class RunScale : std::uint8_t { Desk, Paper };

inline const char* to_string(RunScale s) { return s == RunScale::Desk ? "desk" : "paper"; }

inline RunScale scale_from_string(const std::string& s) {
  if (s == "desk") return RunScale::Desk;
  if (s == "paper") return RunScale::Paper;
  throw ConfigError("unknown scale '" + s + "' (expected desk|paper)");
}

/// Step-decay learning-rate schedule: lr0 held for `hold_epochs`, then one
/// multiplicative decay every `decay_every` epochs, floored at lr_min.
/// Training stops early when validation fails to improve for `patience`
/// epochs (patience 0 disables early stopping).
struct Schedule {
  int max_epochs = 5000;
  double lr0 = 1e-3;
  double decay = 0.1;
  int hold_epochs = 1667;
  int decay_every = 833;
  double lr_min = 1e-7;
  int patience = 1000;
  int val_every = 10;

  double lr_at(int epoch) const {
    if (epoch < hold_epochs || decay_every <= 0) return lr0;
    const int steps = 1 + (epoch - hold_epochs) / decay_every;
    return std::max(lr_min, lr0 * std::pow(decay, steps));
  }

  static Schedule pinn(RunScale scale) {
    if (scale == RunScale::Paper) return Schedule{30000, 1e-3, 0.1, 10000, 5000, 1e-7, 1000, 1};
    return Schedule{5000, 1e-3, 0.1, 1667, 833, 1e-7, 1000, 10};
  }

  static Schedule adapt(RunScale scale) {
    if (scale == RunScale::Paper) return Schedule{30000, 1e-3, 0.1, 10000, 5000, 1e-7, 1000, 1};
    return Schedule{2000, 1e-3, 0.1, 667, 333, 1e-7, 1000, 10};
  }

  static Schedule hyper(RunScale scale) {
    if (scale == RunScale::Paper) return Schedule{15000, 1e-3, 0.1, 5000, 3000, 1e-7, 0, 1};
    return Schedule{3000, 1e-3, 0.1, 1000, 600, 1e-7, 0, 10};
  }
};

}  // namespace hyperlora
