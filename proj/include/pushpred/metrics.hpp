#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "pushpred/geometry.hpp"

namespace pushpred {

// Per-variable normalization statistics. Input statistics are per component;
// the displacement std is pooled over x and y (one shared scale), the
// rotation std is its own scalar. Fit on the offline training split and kept
// fixed afterwards.
struct NormStats {
  Vec2 mean_robot_pos, std_robot_pos;      // p_r^o
  Vec2 mean_robot_motion, std_robot_motion;  // u_r^o
  Vec2 mean_dp;                            // per-component means of dp_o
  double std_dp = 1.0;                     // pooled over dp_o.x and dp_o.y
  double mean_dw = 0.0;
  double std_dw = 1.0;

  bool stds_positive() const {
    return std_robot_pos.x > 0.0 && std_robot_pos.y > 0.0 &&
           std_robot_motion.x > 0.0 && std_robot_motion.y > 0.0 &&
           std_dp > 0.0 && std_dw > 0.0;
  }

  static NormStats identity() {
    return {{0, 0}, {1, 1}, {0, 0}, {1, 1}, {0, 0}, 1.0, 0.0, 1.0};
  }
};

// One prediction's normalized squared errors. total is the training
// objective for a single sample.
struct LossBreakdown {
  double pos_x = 0.0;
  double pos_y = 0.0;
  double rot = 0.0;
  double total = 0.0;
};

inline LossBreakdown step_loss(const PushOutcome& pred,
                               const PushOutcome& actual,
                               const NormStats& stats) {
  const double inv_var_dp = 1.0 / (stats.std_dp * stats.std_dp);
  const double inv_var_dw = 1.0 / (stats.std_dw * stats.std_dw);
  LossBreakdown out;
  const double ex = pred.dp.x - actual.dp.x;
  const double ey = pred.dp.y - actual.dp.y;
  const double ew = pred.dw - actual.dw;
  out.pos_x = ex * ex * inv_var_dp;
  out.pos_y = ey * ey * inv_var_dp;
  out.rot = ew * ew * inv_var_dw;
  out.total = out.pos_x + out.pos_y + out.rot;
  return out;
}

// Gradient of step_loss(...).total with respect to the prediction.
struct LossGrad {
  Vec2 d_dp;
  double d_dw = 0.0;
};

inline LossGrad step_loss_grad(const PushOutcome& pred,
                               const PushOutcome& actual,
                               const NormStats& stats) {
  const double inv_var_dp = 1.0 / (stats.std_dp * stats.std_dp);
  const double inv_var_dw = 1.0 / (stats.std_dw * stats.std_dw);
  return {{2.0 * (pred.dp.x - actual.dp.x) * inv_var_dp,
           2.0 * (pred.dp.y - actual.dp.y) * inv_var_dp},
          2.0 * (pred.dw - actual.dw) * inv_var_dw};
}

struct NmseSummary {
  double pos = 0.0;
  double rot = 0.0;
};

// NMSE_pos = mean of (pos_x + pos_y)/2, NMSE_rot = mean of rot.
inline NmseSummary nmse_summary(std::span<const LossBreakdown> losses) {
  if (losses.empty()) {
    throw std::invalid_argument("nmse_summary: empty loss sequence");
  }
  NmseSummary s;
  for (const auto& l : losses) {
    s.pos += 0.5 * (l.pos_x + l.pos_y);
    s.rot += l.rot;
  }
  s.pos /= static_cast<double>(losses.size());
  s.rot /= static_cast<double>(losses.size());
  return s;
}

// Trailing moving average; the warm-up prefix averages over what is
// available so the output has the same length as the input.
inline std::vector<double> moving_average(std::span<const double> series,
                                          int window = 10) {
  if (window < 1) {
    throw std::invalid_argument("moving_average: window must be >= 1");
  }
  std::vector<double> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    const std::size_t lo = i + 1 >= static_cast<std::size_t>(window)
                               ? i + 1 - static_cast<std::size_t>(window)
                               : 0;
    double acc = 0.0;
    for (std::size_t j = lo; j <= i; ++j) acc += series[j];
    out[i] = acc / static_cast<double>(i - lo + 1);
  }
  return out;
}

}  // namespace pushpred
