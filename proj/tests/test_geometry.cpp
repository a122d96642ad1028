#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "pushpred/geometry.hpp"
#include "pushpred/rng.hpp"

using namespace pushpred;
using Catch::Matchers::WithinAbs;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("rotate matches the rotation matrix") {
  const Vec2 a = rotate(0.0, {1.0, 2.0});
  CHECK_THAT(a.x, WithinAbs(1.0, 1e-15));
  CHECK_THAT(a.y, WithinAbs(2.0, 1e-15));

  const Vec2 b = rotate(kPi / 2.0, {1.0, 0.0});
  CHECK_THAT(b.x, WithinAbs(0.0, 1e-15));
  CHECK_THAT(b.y, WithinAbs(1.0, 1e-15));

  // direct evaluation of R_{-pi/2}: [[0, 1], [-1, 0]]
  const Vec2 c = rotate(-kPi / 2.0, {0.0, 1.0});
  CHECK_THAT(c.x, WithinAbs(1.0, 1e-15));
  CHECK_THAT(c.y, WithinAbs(0.0, 1e-15));
}

TEST_CASE("rotation is an isometry and inverts cleanly") {
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    const double theta = rng.uniform(-10.0, 10.0);
    const Vec2 v{rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)};
    const Vec2 r = rotate(theta, v);
    CHECK(std::abs(norm(r) - norm(v)) <= 1e-12 * std::max(1.0, norm(v)));
    const Vec2 back = rotate(-theta, r);
    CHECK_THAT(back.x, WithinAbs(v.x, 1e-12));
    CHECK_THAT(back.y, WithinAbs(v.y, 1e-12));
  }
}

TEST_CASE("to_object_frame examples") {
  {
    const auto obs = to_object_frame({{0, 0}, 0.0}, {1, -2}, {0, 1});
    CHECK_THAT(obs.robot_pos.x, WithinAbs(1.0, 1e-15));
    CHECK_THAT(obs.robot_pos.y, WithinAbs(-2.0, 1e-15));
    CHECK_THAT(obs.robot_motion.x, WithinAbs(0.0, 1e-15));
    CHECK_THAT(obs.robot_motion.y, WithinAbs(1.0, 1e-15));
  }
  {
    // R_{-pi/2} by hand
    const auto obs = to_object_frame({{0, 0}, kPi / 2.0}, {0, 1}, {0, 1});
    CHECK_THAT(obs.robot_pos.x, WithinAbs(1.0, 1e-15));
    CHECK_THAT(obs.robot_pos.y, WithinAbs(0.0, 1e-15));
    CHECK_THAT(obs.robot_motion.x, WithinAbs(1.0, 1e-15));
    CHECK_THAT(obs.robot_motion.y, WithinAbs(0.0, 1e-15));
  }
  {
    const auto obs = to_object_frame({{1, 1}, 0.0}, {1, 0}, {1, 0});
    CHECK_THAT(obs.robot_pos.x, WithinAbs(0.0, 1e-15));
    CHECK_THAT(obs.robot_pos.y, WithinAbs(-1.0, 1e-15));
    CHECK_THAT(obs.robot_motion.x, WithinAbs(1.0, 1e-15));
    CHECK_THAT(obs.robot_motion.y, WithinAbs(0.0, 1e-15));
  }
}

TEST_CASE("to_object_frame round-trips the robot position") {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const ObjectPose pose{{rng.uniform(-2, 2), rng.uniform(-2, 2)},
                          rng.uniform(-8, 8)};
    const Vec2 robot{rng.uniform(-2, 2), rng.uniform(-2, 2)};
    const auto obs = to_object_frame(pose, robot, {0, 0});
    const Vec2 world =
        pose.position + rotate(pose.orientation, obs.robot_pos);
    CHECK_THAT(world.x, WithinAbs(robot.x, 1e-12));
    CHECK_THAT(world.y, WithinAbs(robot.y, 1e-12));
  }
}

TEST_CASE("outcome_to_object_frame examples") {
  {
    const auto out = outcome_to_object_frame({{0.3, -0.2}, 0.4},
                                             {{0.3, -0.2}, 0.4});
    CHECK_THAT(out.dp.x, WithinAbs(0.0, 1e-15));
    CHECK_THAT(out.dp.y, WithinAbs(0.0, 1e-15));
    CHECK_THAT(out.dw, WithinAbs(0.0, 1e-15));
  }
  {
    const auto out =
        outcome_to_object_frame({{0, 0}, 0.0}, {{0.1, 0.0}, 0.2});
    CHECK_THAT(out.dp.x, WithinAbs(0.1, 1e-15));
    CHECK_THAT(out.dp.y, WithinAbs(0.0, 1e-15));
    CHECK_THAT(out.dw, WithinAbs(0.2, 1e-15));
  }
  {
    // R_{-pi/2} (0, 0.1) = (0.1, 0)
    const auto out = outcome_to_object_frame({{0, 0}, kPi / 2.0},
                                             {{0.0, 0.1}, kPi / 2.0});
    CHECK_THAT(out.dp.x, WithinAbs(0.1, 1e-15));
    CHECK_THAT(out.dp.y, WithinAbs(0.0, 1e-15));
    CHECK_THAT(out.dw, WithinAbs(0.0, 1e-15));
  }
}

TEST_CASE("outcome_to_world_frame examples") {
  {
    const ObjectPose p = outcome_to_world_frame({{0, 0}, 0.0}, {{0.1, 0}, 0.2});
    CHECK_THAT(p.position.x, WithinAbs(0.1, 1e-15));
    CHECK_THAT(p.position.y, WithinAbs(0.0, 1e-15));
    CHECK_THAT(p.orientation, WithinAbs(0.2, 1e-15));
  }
  {
    // R_{pi/2} (0.1, 0) = (0, 0.1)
    const ObjectPose p =
        outcome_to_world_frame({{0, 0}, kPi / 2.0}, {{0.1, 0}, 0.0});
    CHECK_THAT(p.position.x, WithinAbs(0.0, 1e-15));
    CHECK_THAT(p.position.y, WithinAbs(0.1, 1e-15));
    CHECK_THAT(p.orientation, WithinAbs(kPi / 2.0, 1e-15));
  }
}

TEST_CASE("outcome transforms are inverse pairs over random pose pairs") {
  Rng rng(13);
  for (int i = 0; i < 1000; ++i) {
    const ObjectPose a{{rng.uniform(-2, 2), rng.uniform(-2, 2)},
                       rng.uniform(-3, 3)};
    const ObjectPose b{{rng.uniform(-2, 2), rng.uniform(-2, 2)},
                       rng.uniform(-3, 3)};
    const ObjectPose back =
        outcome_to_world_frame(a, outcome_to_object_frame(a, b));
    CHECK_THAT(back.position.x, WithinAbs(b.position.x, 1e-12));
    CHECK_THAT(back.position.y, WithinAbs(b.position.y, 1e-12));
    CHECK_THAT(wrap_angle(back.orientation - b.orientation),
               WithinAbs(0.0, 1e-12));
  }
}

TEST_CASE("wrap_angle branch convention") {
  CHECK(wrap_angle(0.0) == 0.0);
  CHECK_THAT(wrap_angle(3.0 * kPi / 2.0), WithinAbs(-kPi / 2.0, 1e-15));
  CHECK(wrap_angle(kPi) == kPi);
  CHECK_THAT(wrap_angle(-kPi), WithinAbs(kPi, 1e-15));

  Rng rng(17);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.uniform(-50.0, 50.0);
    const double w = wrap_angle(x);
    CHECK(w > -kPi);
    CHECK(w <= kPi);
    CHECK(wrap_angle(w) == w);  // idempotent
    // equivalent modulo 2 pi
    CHECK_THAT(std::remainder(w - x, 2.0 * kPi), WithinAbs(0.0, 1e-9));
  }
}
