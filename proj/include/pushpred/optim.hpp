#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace pushpred {

struct AdamConfig {
  double lr = 0.005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam over a flat parameter vector.
struct AdamState {
  AdamConfig cfg;
  std::vector<double> m;
  std::vector<double> v;
  long t = 0;

  explicit AdamState(std::size_t n, AdamConfig cfg = {})
      : cfg(cfg), m(n, 0.0), v(n, 0.0) {}
};

inline void adam_step(AdamState& state, std::span<double> params,
                      std::span<const double> grads) {
  if (params.size() != state.m.size() || grads.size() != state.m.size()) {
    throw std::invalid_argument("adam_step: shape mismatch");
  }
  const auto& c = state.cfg;
  state.t += 1;
  const double m_corr = 1.0 - std::pow(c.beta1, state.t);
  const double v_corr = 1.0 - std::pow(c.beta2, state.t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * grads[i];
    state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / m_corr;
    const double v_hat = state.v[i] / v_corr;
    params[i] -= c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
  }
}

struct SgdConfig {
  double lr = 0.005;
  int steps_per_update = 5;
  double max_grad_norm = 0.0;  // 0 disables clipping
};

// Plain gradient descent used for the online update: steps_per_update
// iterations on the same sample, re-evaluating the gradient each step.
// grad_fn(params, grad_out) writes the current gradient into grad_out.
// lr = 0 is allowed and turns the update into a no-op.
template <class GradFn>
void sgd_steps(const SgdConfig& cfg, std::span<double> params,
               GradFn&& grad_fn) {
  if (!(cfg.lr >= 0.0) || cfg.steps_per_update < 1) {
    throw std::invalid_argument("sgd_steps: invalid config");
  }
  std::vector<double> grad(params.size(), 0.0);
  for (int s = 0; s < cfg.steps_per_update; ++s) {
    grad.assign(params.size(), 0.0);
    grad_fn(std::span<const double>(params.data(), params.size()),
            std::span<double>(grad.data(), grad.size()));
    if (cfg.max_grad_norm > 0.0) {
      double sq = 0.0;
      for (double g : grad) sq += g * g;
      const double n = std::sqrt(sq);
      if (n > cfg.max_grad_norm) {
        const double scale = cfg.max_grad_norm / n;
        for (double& g : grad) g *= scale;
      }
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      params[i] -= cfg.lr * grad[i];
    }
  }
}

}  // namespace pushpred
