#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include "pushpred/geometry.hpp"

namespace pushpred {

// The fast-adapting analytical parameter: COM offset v = p_o - COM in the
// object frame, and the friction parameter h stored as rho with
// h = h_min + exp(rho). The reparameterization keeps h strictly positive
// under unconstrained gradient descent and bounds the 1/h^2 term of the
// rotation equation.
struct OnlineParams {
  Vec2 v;
  double rho = 0.0;

  static constexpr double h_min = 1e-3;

  double h() const { return h_min + std::exp(rho); }
  double dh_drho() const { return std::exp(rho); }

  // requires h > h_min
  static OnlineParams with_h(Vec2 v, double h) {
    if (!(h > h_min)) {
      throw std::invalid_argument("OnlineParams::with_h: h must exceed h_min");
    }
    return {v, std::log(h - h_min)};
  }
};

// Contact point c and contact-point motion u_c, both relative to the COM in
// the object frame.
struct ContactState {
  Vec2 c;
  Vec2 u_c;
};

// COM displacement and object rotation produced by one push step.
struct PhysicalOutcome {
  Vec2 d_com;
  double d_omega = 0.0;
};

// Quasi-static pushing dynamics:
//   dCOM_x = ((h^2 + c_x^2) u_x + c_x c_y u_y) / (h^2 + |c|^2)
//   dCOM_y = ((h^2 + c_y^2) u_y + c_x c_y u_x) / (h^2 + |c|^2)
//   dw     = (c_x dCOM_y - c_y dCOM_x) / h^2
// The rotation is evaluated through its exact simplification
// dw = (c x u_c) / (h^2 + |c|^2), which cancels the h^2 division and keeps
// pushes aimed through the COM at dw = 0 instead of h^-2-amplified noise.
inline PhysicalOutcome physical_push(const ContactState& contact, double h) {
  if (!(h > 0.0)) {
    throw std::domain_error("physical_push: h must be positive");
  }
  const double cx = contact.c.x, cy = contact.c.y;
  const double ux = contact.u_c.x, uy = contact.u_c.y;
  const double h2 = h * h;
  const double denom = h2 + cx * cx + cy * cy;
  PhysicalOutcome out;
  out.d_com.x = ((h2 + cx * cx) * ux + cx * cy * uy) / denom;
  out.d_com.y = ((h2 + cy * cy) * uy + cx * cy * ux) / denom;
  out.d_omega = (cx * uy - cy * ux) / denom;
  return out;
}

// Full Jacobian of physical_push. Row order (d_com.x, d_com.y, d_omega),
// column order (c.x, c.y, u_c.x, u_c.y, h).
struct PhysicalPushJacobian {
  std::array<std::array<double, 5>, 3> m{};

  const std::array<double, 5>& d_com_x() const { return m[0]; }
  const std::array<double, 5>& d_com_y() const { return m[1]; }
  const std::array<double, 5>& d_omega() const { return m[2]; }
};

inline PhysicalPushJacobian physical_push_grad(const ContactState& contact,
                                               double h) {
  if (!(h > 0.0)) {
    throw std::domain_error("physical_push_grad: h must be positive");
  }
  const double cx = contact.c.x, cy = contact.c.y;
  const double ux = contact.u_c.x, uy = contact.u_c.y;
  const double h2 = h * h;
  const double denom = h2 + cx * cx + cy * cy;

  const double nx = (h2 + cx * cx) * ux + cx * cy * uy;
  const double ny = (h2 + cy * cy) * uy + cx * cy * ux;
  const double gx = nx / denom;  // d_com.x
  const double gy = ny / denom;  // d_com.y

  // numerator partials
  const std::array<double, 5> dnx = {2.0 * cx * ux + cy * uy, cx * uy,
                                     h2 + cx * cx, cx * cy, 2.0 * h * ux};
  const std::array<double, 5> dny = {cy * ux, 2.0 * cy * uy + cx * ux, cx * cy,
                                     h2 + cy * cy, 2.0 * h * uy};
  // denominator partials
  const std::array<double, 5> dden = {2.0 * cx, 2.0 * cy, 0.0, 0.0, 2.0 * h};

  PhysicalPushJacobian jac;
  for (int k = 0; k < 5; ++k) {
    jac.m[0][k] = (dnx[k] - gx * dden[k]) / denom;
    jac.m[1][k] = (dny[k] - gy * dden[k]) / denom;
  }
  // dw = (cx uy - cy ux) / denom
  const double gw = (cx * uy - cy * ux) / denom;
  jac.m[2][0] = (uy - gw * 2.0 * cx) / denom;
  jac.m[2][1] = (-ux - gw * 2.0 * cy) / denom;
  jac.m[2][2] = -cy / denom;
  jac.m[2][3] = cx / denom;
  jac.m[2][4] = -gw * 2.0 * h / denom;
  return jac;
}

// Eq.-(15)-style input correction: robot position relative to the COM.
inline Vec2 correct_input_position(Vec2 p_r_o, Vec2 v) { return p_r_o + v; }

// Eq.-(16)-style output correction: object-center motion from COM motion,
// dp_o = dCOM + (R_dw - I) v.
inline Vec2 correct_output_motion(Vec2 d_com, double d_omega, Vec2 v) {
  return d_com + (rotation(d_omega) - Mat2::identity()) * v;
}

struct OutputMotionJacobian {
  Mat2 d_dcom;     // identity
  Vec2 d_domega;   // R'_dw v
  Mat2 d_v;        // R_dw - I
};

inline OutputMotionJacobian correct_output_motion_grad(Vec2 /*d_com*/,
                                                       double d_omega,
                                                       Vec2 v) {
  return {Mat2::identity(), rotation_deriv(d_omega) * v,
          rotation(d_omega) - Mat2::identity()};
}

}  // namespace pushpred
