#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pushpred/data.hpp"
#include "pushpred/geometry.hpp"
#include "pushpred/io.hpp"
#include "pushpred/physics.hpp"
#include "pushpred/rng.hpp"

namespace pushpred {

// Synthetic scene: a disc robot pushing a rectangular object under the
// quasi-static model with ground-truth COM offset and friction parameter.
struct SceneConfig {
  Vec2 box_half_extents{0.25, 0.2};
  double robot_radius = 0.08;
  Vec2 true_v{0.0, 0.0};
  double true_h = 0.05;
  double noise_std_pos = 0.0;   // observation noise on recorded poses
  double noise_std_rot = 0.0;
  double step_length = 0.015;   // robot travel per step
  double slip_noise = 0.0;      // tangential attenuation in [0, 1); 0 = stick
  std::uint64_t seed = 0;

  void validate() const {
    if (!(box_half_extents.x > 0.0 && box_half_extents.y > 0.0)) {
      throw std::invalid_argument("SceneConfig: box extents must be positive");
    }
    if (!(robot_radius > 0.0)) {
      throw std::invalid_argument("SceneConfig: robot radius must be positive");
    }
    if (!(true_h > 0.0)) {
      throw std::invalid_argument("SceneConfig: true_h must be positive");
    }
    if (!(step_length > 0.0)) {
      throw std::invalid_argument("SceneConfig: step length must be positive");
    }
    if (noise_std_pos < 0.0 || noise_std_rot < 0.0) {
      throw std::invalid_argument("SceneConfig: noise must be >= 0");
    }
    if (slip_noise < 0.0 || slip_noise >= 1.0) {
      throw std::invalid_argument("SceneConfig: slip_noise must be in [0, 1)");
    }
    // no tunneling through the contact surface
    if (!(step_length < robot_radius / 2.0)) {
      throw std::invalid_argument(
          "SceneConfig: step length must stay below robot_radius/2");
    }
  }
};

enum class BoxSide { bottom, top, left, right };

inline const char* side_name(BoxSide s) {
  switch (s) {
    case BoxSide::bottom: return "bottom";
    case BoxSide::top: return "top";
    case BoxSide::left: return "left";
    case BoxSide::right: return "right";
  }
  return "?";
}

// One straight push: the robot starts off a chosen side, displaced by
// start_offset along that side, and walks a fixed direction obtained by
// rotating the side's inward normal by approach_angle. start_gap backs the
// disc off the surface; the default 0 starts the push already in contact,
// matching straight-push recordings.
struct PushScript {
  BoxSide side = BoxSide::bottom;
  double start_offset = 0.0;
  double approach_angle = 0.0;
  int steps = 60;
  double start_gap = 0.0;

  void validate() const {
    if (steps < 2) {
      throw std::invalid_argument("PushScript: need at least 2 steps");
    }
    if (!std::isfinite(start_offset) || !std::isfinite(approach_angle) ||
        !std::isfinite(start_gap)) {
      throw std::invalid_argument("PushScript: non-finite fields");
    }
  }
};

namespace detail {

// Closest point of the box boundary (axis-aligned, centered at the origin)
// to q, with the signed distance of q to the boundary (negative inside).
inline std::pair<Vec2, double> closest_boundary_point(Vec2 half, Vec2 q) {
  const Vec2 clamped{std::clamp(q.x, -half.x, half.x),
                     std::clamp(q.y, -half.y, half.y)};
  if (clamped.x != q.x || clamped.y != q.y) {
    return {clamped, norm(q - clamped)};
  }
  // inside: project to the nearest side
  const double dx = half.x - std::abs(q.x);
  const double dy = half.y - std::abs(q.y);
  Vec2 cp = q;
  if (dx < dy) {
    cp.x = q.x >= 0.0 ? half.x : -half.x;
    return {cp, -dx};
  }
  cp.y = q.y >= 0.0 ? half.y : -half.y;
  return {cp, -dy};
}

}  // namespace detail

// Resolves disc/box contact in the object frame. The contact point is the
// closest point of the box boundary to the disc center after the motion;
// penetration is handled by that same projection. Contact coordinates are
// returned relative to the true COM. Sticking contact: u_c = u_r^o.
inline std::optional<ContactState> contact_resolve(const SceneConfig& scene,
                                                   const ObjectPose& pose,
                                                   Vec2 robot_pos,
                                                   Vec2 robot_motion) {
  const PushInput obs = to_object_frame(pose, robot_pos, robot_motion);
  const Vec2 q = obs.robot_pos + obs.robot_motion;
  const auto [cp, dist] =
      detail::closest_boundary_point(scene.box_half_extents, q);
  if (dist > scene.robot_radius) {
    return std::nullopt;
  }
  return ContactState{cp + scene.true_v, obs.robot_motion};
}

// Rolls one scripted push. Observation noise perturbs only the recorded
// object poses; the dynamics evolve noise-free.
inline Trajectory simulate_push(const SceneConfig& scene,
                                const PushScript& script,
                                const std::string& id) {
  scene.validate();
  script.validate();

  Vec2 inward;   // unit normal pointing into the box
  Vec2 tangent;  // unit tangent of the side
  double side_half = 0.0;
  switch (script.side) {
    case BoxSide::bottom:
      inward = {0.0, 1.0};
      tangent = {1.0, 0.0};
      side_half = scene.box_half_extents.y;
      break;
    case BoxSide::top:
      inward = {0.0, -1.0};
      tangent = {1.0, 0.0};
      side_half = scene.box_half_extents.y;
      break;
    case BoxSide::left:
      inward = {1.0, 0.0};
      tangent = {0.0, 1.0};
      side_half = scene.box_half_extents.x;
      break;
    case BoxSide::right:
      inward = {-1.0, 0.0};
      tangent = {0.0, 1.0};
      side_half = scene.box_half_extents.x;
      break;
  }

  ObjectPose pose{};  // the object starts centered, axis aligned
  Vec2 robot = tangent * script.start_offset -
               inward * (side_half + scene.robot_radius + script.start_gap);
  const Vec2 u_r = rotate(script.approach_angle, inward) * scene.step_length;

  Rng rng(scene.seed);
  Trajectory traj;
  traj.id = id;
  traj.object_name = "box_" + format_double(2.0 * scene.box_half_extents.x) +
                     "x" + format_double(2.0 * scene.box_half_extents.y);
  traj.surface_name = "synthetic";
  traj.com_label = (scene.true_v.x == 0.0 && scene.true_v.y == 0.0)
                       ? "center"
                       : "offset(" + format_double(scene.true_v.x) + "," +
                             format_double(scene.true_v.y) + ")";
  traj.pushing_side = side_name(script.side);
  traj.steps.reserve(script.steps);

  for (int t = 0; t < script.steps; ++t) {
    TrajectoryStep step;
    step.t = t;
    step.object_pose.position =
        pose.position + Vec2{rng.normal(0.0, scene.noise_std_pos),
                             rng.normal(0.0, scene.noise_std_pos)};
    step.object_pose.orientation =
        wrap_angle(pose.orientation + rng.normal(0.0, scene.noise_std_rot));
    step.robot_pos = robot;
    step.robot_motion = u_r;
    traj.steps.push_back(step);

    if (t + 1 == script.steps) break;

    if (auto contact = contact_resolve(scene, pose, robot, u_r)) {
      if (scene.slip_noise > 0.0) {
        // attenuate the part of the contact motion tangential to the pushed
        // side; the box is axis-aligned in its own frame, so the side normal
        // is constant there
        const double normal_part = dot(contact->u_c, inward);
        const Vec2 tangential = contact->u_c - inward * normal_part;
        const double keep = 1.0 - scene.slip_noise * rng.uniform();
        contact->u_c = inward * normal_part + tangential * keep;
      }
      const PhysicalOutcome phys = physical_push(*contact, scene.true_h);
      const Vec2 dp =
          correct_output_motion(phys.d_com, phys.d_omega, scene.true_v);
      pose = outcome_to_world_frame(pose, {dp, phys.d_omega});
    }
    robot += u_r;
  }
  return traj;
}

struct SuiteEntry {
  std::string file;
  SceneConfig scene;
  PushScript script;
};

struct SuiteManifest {
  std::vector<SuiteEntry> entries;
};

inline nlohmann::json to_json(const SceneConfig& s) {
  return {{"box_half_x", s.box_half_extents.x},
          {"box_half_y", s.box_half_extents.y},
          {"robot_radius", s.robot_radius},
          {"true_v_x", s.true_v.x},
          {"true_v_y", s.true_v.y},
          {"true_h", s.true_h},
          {"noise_std_pos", s.noise_std_pos},
          {"noise_std_rot", s.noise_std_rot},
          {"step_length", s.step_length},
          {"slip_noise", s.slip_noise},
          {"seed", s.seed}};
}

inline SceneConfig scene_from_json(const nlohmann::json& j) {
  SceneConfig s;
  s.box_half_extents = {j.at("box_half_x").get<double>(),
                        j.at("box_half_y").get<double>()};
  s.robot_radius = j.at("robot_radius").get<double>();
  s.true_v = {j.at("true_v_x").get<double>(), j.at("true_v_y").get<double>()};
  s.true_h = j.at("true_h").get<double>();
  s.noise_std_pos = j.at("noise_std_pos").get<double>();
  s.noise_std_rot = j.at("noise_std_rot").get<double>();
  s.step_length = j.at("step_length").get<double>();
  s.slip_noise = j.at("slip_noise").get<double>();
  s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

inline nlohmann::json to_json(const PushScript& s) {
  return {{"side", side_name(s.side)},
          {"start_offset", s.start_offset},
          {"approach_angle", s.approach_angle},
          {"steps", s.steps},
          {"start_gap", s.start_gap}};
}

inline PushScript script_from_json(const nlohmann::json& j) {
  PushScript s;
  const std::string side = j.at("side").get<std::string>();
  if (side == "bottom") s.side = BoxSide::bottom;
  else if (side == "top") s.side = BoxSide::top;
  else if (side == "left") s.side = BoxSide::left;
  else if (side == "right") s.side = BoxSide::right;
  else throw std::runtime_error("unknown box side: " + side);
  s.start_offset = j.at("start_offset").get<double>();
  s.approach_angle = j.at("approach_angle").get<double>();
  s.steps = j.at("steps").get<int>();
  s.start_gap = j.at("start_gap").get<double>();
  return s;
}

// Simulates a prepared list of (scene, script) entries into out_dir as
// canonical JSONL, one file per trajectory, plus a manifest with full
// provenance. Per-trajectory seeds derive from (master_seed, entry index),
// so outputs do not depend on generation order.
inline SuiteManifest generate_suite(std::span<const SuiteEntry> entries,
                                    const std::filesystem::path& out_dir,
                                    std::uint64_t master_seed,
                                    const std::string& prefix = "traj") {
  if (entries.empty()) {
    throw std::invalid_argument("generate_suite: no entries");
  }
  std::filesystem::create_directories(out_dir);
  SuiteManifest manifest;
  std::size_t index = 0;
  for (const auto& source : entries) {
    SuiteEntry entry = source;
    entry.scene.seed = derive_seed(master_seed, index);
    char name[64];
    std::snprintf(name, sizeof(name), "%s_%04zu.jsonl", prefix.c_str(),
                  index);
    entry.file = name;
    const std::string id = prefix + "_" + std::to_string(index);
    const Trajectory traj = simulate_push(entry.scene, entry.script, id);
    save_trajectories(out_dir / entry.file, std::span(&traj, 1));
    manifest.entries.push_back(std::move(entry));
    ++index;
  }

  nlohmann::json j;
  j["files"] = nlohmann::json::array();
  for (const auto& e : manifest.entries) {
    j["files"].push_back({{"file", e.file},
                          {"scene", to_json(e.scene)},
                          {"script", to_json(e.script)}});
  }
  write_file(out_dir / "manifest.json", j.dump(2) + "\n");
  return manifest;
}

// Cross-product form: every scene variant crossed with every script.
inline SuiteManifest generate_suite(std::span<const SceneConfig> scenes,
                                    std::span<const PushScript> scripts,
                                    const std::filesystem::path& out_dir,
                                    std::uint64_t master_seed,
                                    const std::string& prefix = "traj") {
  if (scenes.empty() || scripts.empty()) {
    throw std::invalid_argument("generate_suite: empty scenes or scripts");
  }
  std::vector<SuiteEntry> entries;
  entries.reserve(scenes.size() * scripts.size());
  for (const auto& scene : scenes) {
    for (const auto& script : scripts) {
      entries.push_back({"", scene, script});
    }
  }
  return generate_suite(entries, out_dir, master_seed, prefix);
}

// Loads every trajectory listed by a manifest, in manifest order.
inline std::vector<Trajectory> load_suite(
    const std::filesystem::path& manifest_path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(manifest_path));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("manifest parse error: " + manifest_path.string() +
                             ": " + e.what());
  }
  std::vector<Trajectory> out;
  const auto dir = manifest_path.parent_path();
  for (const auto& f : j.at("files")) {
    auto loaded = load_trajectories(dir / f.at("file").get<std::string>());
    out.insert(out.end(), loaded.begin(), loaded.end());
  }
  return out;
}

}  // namespace pushpred
