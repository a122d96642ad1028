#pragma once

#include <array>
#include <stdexcept>

#include "pushpred/geometry.hpp"
#include "pushpred/metrics.hpp"
#include "pushpred/nn.hpp"
#include "pushpred/physics.hpp"

namespace pushpred {

// The combined predictor: COM input correction -> MLP contact prediction ->
// quasi-static physics -> COM output correction. The MLP runs in normalized
// space; its outputs are de-normalized with the robot position/motion stats
// (same length units as c and u_c) before entering the physics, which works
// in physical units.
struct CombinedModel {
  MlpParams mlp;        // theta_offline
  OnlineParams online;  // theta_online = (v, h)
  NormStats norm;

  void validate() const {
    if (mlp.input_dim() != 4 || mlp.output_dim() != 4) {
      throw std::invalid_argument("CombinedModel: mlp must map 4 -> 4");
    }
    if (!norm.stds_positive()) {
      throw std::invalid_argument("CombinedModel: norm stds must be positive");
    }
  }
};

struct CombinedTape {
  Vec2 input_pos;  // p_r^o as given
  MlpTape mlp_tape;
  std::array<double, 4> mlp_out{};
  ContactState contact;
  double h = 0.0;
  PhysicalOutcome phys;
};

inline PushOutcome combined_forward(const CombinedModel& model,
                                    const PushInput& input,
                                    CombinedTape* tape = nullptr) {
  const NormStats& n = model.norm;
  const Vec2 corrected = correct_input_position(input.robot_pos,
                                                model.online.v);
  const std::array<double, 4> zin = {
      (corrected.x - n.mean_robot_pos.x) / n.std_robot_pos.x,
      (corrected.y - n.mean_robot_pos.y) / n.std_robot_pos.y,
      (input.robot_motion.x - n.mean_robot_motion.x) / n.std_robot_motion.x,
      (input.robot_motion.y - n.mean_robot_motion.y) / n.std_robot_motion.y};

  MlpTape local_tape;
  MlpTape* mt = tape ? &tape->mlp_tape : &local_tape;
  const std::vector<double> zout = mlp_forward(model.mlp, zin, mt);

  ContactState contact;
  contact.c = {n.mean_robot_pos.x + n.std_robot_pos.x * zout[0],
               n.mean_robot_pos.y + n.std_robot_pos.y * zout[1]};
  contact.u_c = {n.mean_robot_motion.x + n.std_robot_motion.x * zout[2],
                 n.mean_robot_motion.y + n.std_robot_motion.y * zout[3]};

  const double h = model.online.h();
  const PhysicalOutcome phys = physical_push(contact, h);
  const Vec2 dp = correct_output_motion(phys.d_com, phys.d_omega,
                                        model.online.v);
  if (tape) {
    tape->input_pos = input.robot_pos;
    tape->mlp_out = {zout[0], zout[1], zout[2], zout[3]};
    tape->contact = contact;
    tape->h = h;
    tape->phys = phys;
  }
  return {dp, phys.d_omega};
}

struct OnlineGrads {
  Vec2 d_v;
  double d_rho = 0.0;
};

struct CombinedGrads {
  MlpParams mlp;
  OnlineGrads online;
};

// Pulls the scalar-loss gradient (d_dp, d_dw) back through the output
// correction, the physics, the de-normalization, the MLP, and the input
// correction. v collects gradient from both correction paths.
inline CombinedGrads combined_backward(const CombinedModel& model,
                                       const CombinedTape& tape,
                                       const LossGrad& loss_grad) {
  const NormStats& n = model.norm;
  CombinedGrads out;

  // output correction: dp = d_com + (R_dw - I) v
  const OutputMotionJacobian j16 = correct_output_motion_grad(
      tape.phys.d_com, tape.phys.d_omega, model.online.v);
  const Vec2 g_dcom = loss_grad.d_dp;
  const double g_domega = loss_grad.d_dw + dot(loss_grad.d_dp, j16.d_domega);
  out.online.d_v = j16.d_v.transposed() * loss_grad.d_dp;

  // physics: rows (d_com.x, d_com.y, d_omega) x cols (c.x, c.y, u.x, u.y, h)
  const PhysicalPushJacobian jp = physical_push_grad(tape.contact, tape.h);
  std::array<double, 5> g_in{};
  for (int k = 0; k < 5; ++k) {
    g_in[k] = g_dcom.x * jp.m[0][k] + g_dcom.y * jp.m[1][k] +
              g_domega * jp.m[2][k];
  }
  out.online.d_rho = g_in[4] * model.online.dh_drho();

  // de-normalization scales
  const std::array<double, 4> g_zout = {
      g_in[0] * n.std_robot_pos.x, g_in[1] * n.std_robot_pos.y,
      g_in[2] * n.std_robot_motion.x, g_in[3] * n.std_robot_motion.y};

  MlpBackwardResult mlp_grads = mlp_backward(model.mlp, tape.mlp_tape, g_zout);
  out.mlp = std::move(mlp_grads.param_grads);

  // normalization of the corrected input, then the additive correction
  const Vec2 g_corrected = {mlp_grads.input_grad[0] / n.std_robot_pos.x,
                            mlp_grads.input_grad[1] / n.std_robot_pos.y};
  out.online.d_v += g_corrected;
  return out;
}

// Pure neural network baseline: z-scored (p_r^o, u_r^o) -> normalized
// (dp_o, dw_o), de-normalized with the outcome stats.
inline std::array<double, 4> baseline_normalize_input(const NormStats& n,
                                                      const PushInput& input) {
  return {(input.robot_pos.x - n.mean_robot_pos.x) / n.std_robot_pos.x,
          (input.robot_pos.y - n.mean_robot_pos.y) / n.std_robot_pos.y,
          (input.robot_motion.x - n.mean_robot_motion.x) / n.std_robot_motion.x,
          (input.robot_motion.y - n.mean_robot_motion.y) /
              n.std_robot_motion.y};
}

inline std::array<double, 3> baseline_normalize_target(
    const NormStats& n, const PushOutcome& outcome) {
  return {(outcome.dp.x - n.mean_dp.x) / n.std_dp,
          (outcome.dp.y - n.mean_dp.y) / n.std_dp,
          (outcome.dw - n.mean_dw) / n.std_dw};
}

inline PushOutcome baseline_nn_forward(const MlpParams& params,
                                       const NormStats& norm,
                                       const PushInput& input,
                                       MlpTape* tape = nullptr) {
  if (params.input_dim() != 4 || params.output_dim() != 3) {
    throw std::invalid_argument("baseline_nn_forward: mlp must map 4 -> 3");
  }
  const auto zin = baseline_normalize_input(norm, input);
  const std::vector<double> zout = mlp_forward(params, zin, tape);
  return {{norm.mean_dp.x + norm.std_dp * zout[0],
           norm.mean_dp.y + norm.std_dp * zout[1]},
          norm.mean_dw + norm.std_dw * zout[2]};
}

}  // namespace pushpred
