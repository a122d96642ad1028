#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <set>
#include <vector>

#include "pushpred/data.hpp"
#include "pushpred/io.hpp"
#include "pushpred/metrics.hpp"
#include "pushpred/simulator.hpp"

using namespace pushpred;
using Catch::Matchers::WithinAbs;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("pushpred_sim_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

SceneConfig test_scene() {
  SceneConfig s;
  s.box_half_extents = {0.35, 0.3};
  s.robot_radius = 0.1;
  s.step_length = 0.018;
  s.true_h = 0.05;
  return s;
}

std::vector<PushScript> varied_scripts(int steps = 40) {
  return {{BoxSide::bottom, 0.05, 0.15, steps},
          {BoxSide::left, -0.1, -0.2, steps},
          {BoxSide::top, 0.12, 0.0, steps},
          {BoxSide::right, -0.04, 0.25, steps}};
}

}  // namespace

TEST_CASE("scene validation") {
  SceneConfig s = test_scene();
  CHECK_NOTHROW(s.validate());
  s.step_length = s.robot_radius;  // tunneling risk
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = test_scene();
  s.true_h = 0.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = test_scene();
  s.noise_std_pos = -1.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  PushScript p{BoxSide::bottom, 0.0, 0.0, 1};
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("contact_resolve geometry") {
  const SceneConfig s = test_scene();
  const ObjectPose pose{};

  // far away: no contact
  CHECK_FALSE(contact_resolve(s, pose, {0.0, -2.0}, {0.0, 0.01}));

  // touching the bottom side dead on
  const double start_y = -(s.box_half_extents.y + s.robot_radius);
  const auto c = contact_resolve(s, pose, {0.0, start_y}, {0.0, 0.01});
  REQUIRE(c);
  CHECK_THAT(c->c.x, WithinAbs(0.0, 1e-15));
  CHECK_THAT(c->c.y, WithinAbs(-s.box_half_extents.y, 1e-15));
  CHECK_THAT(c->u_c.x, WithinAbs(0.0, 1e-15));
  CHECK_THAT(c->u_c.y, WithinAbs(0.01, 1e-15));

  // tangential motion still sticks (disc just touching the side)
  const auto t =
      contact_resolve(s, pose, {0.0, start_y + 1e-4}, {0.02, 0.0});
  REQUIRE(t);
  CHECK_THAT(t->u_c.x, WithinAbs(0.02, 1e-15));
  CHECK_THAT(t->u_c.y, WithinAbs(0.0, 1e-15));

  // the COM offset shifts the reported contact coordinates
  SceneConfig off = s;
  off.true_v = {0.02, -0.01};
  const auto oc = contact_resolve(off, pose, {0.0, start_y}, {0.0, 0.01});
  REQUIRE(oc);
  CHECK_THAT(oc->c.x, WithinAbs(0.02, 1e-15));
  CHECK_THAT(oc->c.y, WithinAbs(-s.box_half_extents.y - 0.01, 1e-15));
}

TEST_CASE("pushes aimed through the COM translate without rotating") {
  SceneConfig s = test_scene();
  const PushScript script{BoxSide::bottom, 0.0, 0.0, 60};
  const Trajectory traj = simulate_push(s, script, "central");
  REQUIRE(traj.steps.size() == 60);
  CHECK_THAT(traj.steps.back().object_pose.orientation, WithinAbs(0.0, 1e-9));
  // symmetric central push: the object moves straight along the push
  CHECK_THAT(traj.steps.back().object_pose.position.x, WithinAbs(0.0, 1e-9));
  CHECK(traj.steps.back().object_pose.position.y > 0.1);
}

TEST_CASE("same seed reproduces bit-identical trajectories") {
  SceneConfig s = test_scene();
  s.noise_std_pos = 0.001;
  s.noise_std_rot = 0.01;
  s.seed = 12345;
  const PushScript script{BoxSide::left, 0.07, -0.1, 30};
  TempDir tmp;
  const Trajectory a = simulate_push(s, script, "x");
  const Trajectory b = simulate_push(s, script, "x");
  save_trajectories(tmp.path / "a.jsonl", std::span(&a, 1));
  save_trajectories(tmp.path / "b.jsonl", std::span(&b, 1));
  CHECK(read_file(tmp.path / "a.jsonl") == read_file(tmp.path / "b.jsonl"));
}

TEST_CASE("oracle identity: the simulator and the physics are one model") {
  // with zero noise, every recorded contact step must be reproduced exactly
  // by the physics under the true parameters and the true contact
  SceneConfig s = test_scene();
  std::vector<SupervisedPair> all_pairs;
  std::vector<std::pair<SupervisedPair, ContactState>> contact_pairs;
  for (const auto& script : varied_scripts()) {
    const Trajectory traj = simulate_push(s, script, "oracle");
    for (std::size_t t = 0; t + 1 < traj.steps.size(); ++t) {
      const auto& step = traj.steps[t];
      SupervisedPair pair;
      pair.x = to_object_frame(step.object_pose, step.robot_pos,
                               step.robot_motion);
      pair.y = outcome_to_object_frame(step.object_pose,
                                       traj.steps[t + 1].object_pose);
      all_pairs.push_back(pair);
      const auto contact = contact_resolve(s, step.object_pose,
                                           step.robot_pos, step.robot_motion);
      if (contact) contact_pairs.push_back({pair, *contact});
    }
  }
  REQUIRE(contact_pairs.size() > 50);
  const NormStats stats = fit_norm_stats(all_pairs);
  for (const auto& [pair, contact] : contact_pairs) {
    const PhysicalOutcome phys = physical_push(contact, s.true_h);
    const PushOutcome pred = {
        correct_output_motion(phys.d_com, phys.d_omega, s.true_v),
        phys.d_omega};
    const LossBreakdown loss = step_loss(pred, pair.y, stats);
    CHECK(loss.total < 1e-12);
  }
}

TEST_CASE("oracle identity holds with a COM offset too") {
  SceneConfig s = test_scene();
  s.true_v = {0.02, -0.01};
  const PushScript script{BoxSide::bottom, 0.1, 0.1, 50};
  const Trajectory traj = simulate_push(s, script, "offset");
  int checked = 0;
  for (std::size_t t = 0; t + 1 < traj.steps.size(); ++t) {
    const auto& step = traj.steps[t];
    const auto contact =
        contact_resolve(s, step.object_pose, step.robot_pos,
                        step.robot_motion);
    if (!contact) continue;
    const PhysicalOutcome phys = physical_push(*contact, s.true_h);
    const PushOutcome pred = {
        correct_output_motion(phys.d_com, phys.d_omega, s.true_v),
        phys.d_omega};
    const PushOutcome y = outcome_to_object_frame(
        step.object_pose, traj.steps[t + 1].object_pose);
    CHECK_THAT(pred.dp.x, WithinAbs(y.dp.x, 1e-12));
    CHECK_THAT(pred.dp.y, WithinAbs(y.dp.y, 1e-12));
    CHECK_THAT(pred.dw, WithinAbs(y.dw, 1e-12));
    ++checked;
  }
  CHECK(checked > 30);
}

TEST_CASE("contact points stay on the box boundary") {
  SceneConfig s = test_scene();
  s.true_v = {0.015, 0.02};
  for (const auto& script : varied_scripts(50)) {
    const Trajectory traj = simulate_push(s, script, "boundary");
    for (const auto& step : traj.steps) {
      const auto contact = contact_resolve(s, step.object_pose,
                                           step.robot_pos, step.robot_motion);
      if (!contact) continue;
      const Vec2 in_box_frame = contact->c - s.true_v;
      const double slack =
          std::max(std::abs(in_box_frame.x) - s.box_half_extents.x,
                   std::abs(in_box_frame.y) - s.box_half_extents.y);
      CHECK(slack <= 1e-9);
      CHECK(slack >= -1e-9);  // on the boundary, not inside
    }
  }
}

TEST_CASE("generate_suite writes loadable files and a full manifest") {
  TempDir tmp;
  std::vector<SceneConfig> scenes = {test_scene(), test_scene()};
  scenes[1].true_v = {0.01, 0.01};
  const auto scripts = varied_scripts(20);

  const SuiteManifest manifest =
      generate_suite(scenes, scripts, tmp.path, 99, "suite");
  CHECK(manifest.entries.size() == scenes.size() * scripts.size());

  std::set<std::string> files;
  for (const auto& e : manifest.entries) {
    files.insert(e.file);
    const auto loaded = load_trajectories(tmp.path / e.file);
    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0].steps.size() == 20);
  }
  CHECK(files.size() == manifest.entries.size());

  const auto all = load_suite(tmp.path / "manifest.json");
  CHECK(all.size() == manifest.entries.size());

  // regenerating with the same master seed gives identical bytes
  TempDir tmp2;
  generate_suite(scenes, scripts, tmp2.path, 99, "suite");
  for (const auto& e : manifest.entries) {
    CHECK(read_file(tmp.path / e.file) == read_file(tmp2.path / e.file));
  }
  CHECK(read_file(tmp.path / "manifest.json") ==
        read_file(tmp2.path / "manifest.json"));
}

TEST_CASE("manifest provenance round-trips scenes and scripts") {
  const SceneConfig s = test_scene();
  const nlohmann::json j = to_json(s);
  const SceneConfig back = scene_from_json(j);
  CHECK(back.box_half_extents.x == s.box_half_extents.x);
  CHECK(back.true_h == s.true_h);
  CHECK(back.step_length == s.step_length);

  const PushScript p{BoxSide::right, -0.12, 0.2, 33};
  const PushScript pback = script_from_json(to_json(p));
  CHECK(pback.side == p.side);
  CHECK(pback.start_offset == p.start_offset);
  CHECK(pback.approach_angle == p.approach_angle);
  CHECK(pback.steps == p.steps);
}
