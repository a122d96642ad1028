#pragma once

#include <cmath>
#include <numbers>

namespace pushpred {

// Planar vector. Units are meters for positions and meters-per-step for
// motion commands; everything downstream keeps that convention.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(Vec2 o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  friend constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

// z-component of the 3-d cross product of two in-plane vectors
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

// 2x2 matrix, row layout [[a, b], [c, d]]
struct Mat2 {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

  constexpr Vec2 operator*(Vec2 v) const {
    return {a * v.x + b * v.y, c * v.x + d * v.y};
  }
  constexpr Mat2 operator-(Mat2 o) const {
    return {a - o.a, b - o.b, c - o.c, d - o.d};
  }
  constexpr Mat2 transposed() const { return {a, c, b, d}; }

  static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
};

inline Mat2 rotation(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  return {c, -s, s, c};
}

// dR/dtheta
inline Mat2 rotation_deriv(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  return {-s, -c, c, -s};
}

inline Vec2 rotate(double theta, Vec2 v) { return rotation(theta) * v; }

struct ObjectPose {
  Vec2 position;
  double orientation = 0.0;  // radians
};

// Object-frame observation x = (p_r^o, u_r^o): the model input.
struct PushInput {
  Vec2 robot_pos;
  Vec2 robot_motion;
};

// Object-frame displacement y = (dp_o, dw_o): the model target.
struct PushOutcome {
  Vec2 dp;
  double dw = 0.0;
};

// Maps any finite angle into (-pi, pi].
inline double wrap_angle(double theta) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double t = std::fmod(theta, two_pi);
  if (t <= -std::numbers::pi) t += two_pi;
  if (t > std::numbers::pi) t -= two_pi;
  return t;
}

// Robot position and motion expressed in the object's current frame:
// p_r^o = R_{-w}(p_r - p_o), u_r^o = R_{-w} u_r.
inline PushInput to_object_frame(const ObjectPose& object, Vec2 robot_pos,
                                 Vec2 robot_motion) {
  const Mat2 r = rotation(-object.orientation);
  return {r * (robot_pos - object.position), r * robot_motion};
}

// Object displacement between two poses, expressed in the frame at pose_t:
// dp_o = R_{-w(t)}(p(t+1) - p(t)), dw_o = wrap(w(t+1) - w(t)).
inline PushOutcome outcome_to_object_frame(const ObjectPose& pose_t,
                                           const ObjectPose& pose_t1) {
  const Mat2 r = rotation(-pose_t.orientation);
  return {r * (pose_t1.position - pose_t.position),
          wrap_angle(pose_t1.orientation - pose_t.orientation)};
}

// Inverse of outcome_to_object_frame: composes an object-frame displacement
// onto a world pose. Orientation is kept wrapped.
inline ObjectPose outcome_to_world_frame(const ObjectPose& pose_t,
                                         const PushOutcome& outcome) {
  return {pose_t.position + rotate(pose_t.orientation, outcome.dp),
          wrap_angle(pose_t.orientation + outcome.dw)};
}

}  // namespace pushpred
