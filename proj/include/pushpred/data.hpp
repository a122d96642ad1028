#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pushpred/geometry.hpp"
#include "pushpred/io.hpp"
#include "pushpred/metrics.hpp"
#include "pushpred/rng.hpp"

namespace pushpred {

// One timestamped observation: object pose, robot position, and the motion
// command the robot executes next.
struct TrajectoryStep {
  long t = 0;
  ObjectPose object_pose;
  Vec2 robot_pos;
  Vec2 robot_motion;
};

struct Trajectory {
  std::string id;
  std::string object_name;
  std::string surface_name;
  std::string com_label;
  std::string pushing_side;
  std::vector<TrajectoryStep> steps;
};

// One supervised example derived through the object-frame transforms.
struct SupervisedPair {
  PushInput x;
  PushOutcome y;
};

enum class TrajectoryFormat { jsonl, csv };

inline constexpr std::string_view kCsvHeader =
    "traj_id,t,po_x,po_y,omega,pr_x,pr_y,ur_x,ur_y";

namespace detail {

inline TrajectoryStep step_from_json(const nlohmann::json& j,
                                     const std::string& where,
                                     std::string& traj_id) {
  for (const char* key :
       {"traj_id", "t", "po_x", "po_y", "omega", "pr_x", "pr_y", "ur_x",
        "ur_y"}) {
    if (!j.contains(key)) {
      throw std::runtime_error(where + ": missing field '" + key + "'");
    }
  }
  traj_id = j.at("traj_id").get<std::string>();
  TrajectoryStep s;
  s.t = j.at("t").get<long>();
  s.object_pose.position = {j.at("po_x").get<double>(),
                            j.at("po_y").get<double>()};
  s.object_pose.orientation = j.at("omega").get<double>();
  s.robot_pos = {j.at("pr_x").get<double>(), j.at("pr_y").get<double>()};
  s.robot_motion = {j.at("ur_x").get<double>(), j.at("ur_y").get<double>()};
  return s;
}

inline std::vector<Trajectory> group_rows(
    std::vector<std::pair<std::string, TrajectoryStep>>&& rows,
    const std::string& source) {
  std::vector<Trajectory> out;
  std::map<std::string, std::size_t> index;
  for (auto& [id, step] : rows) {
    auto [it, inserted] = index.emplace(id, out.size());
    if (inserted) {
      out.push_back(Trajectory{id, "", "", "", "", {}});
    }
    out[it->second].steps.push_back(step);
  }
  for (auto& traj : out) {
    std::stable_sort(traj.steps.begin(), traj.steps.end(),
                     [](const auto& a, const auto& b) { return a.t < b.t; });
    for (std::size_t i = 1; i < traj.steps.size(); ++i) {
      if (traj.steps[i].t == traj.steps[i - 1].t) {
        throw std::runtime_error(source + ": trajectory '" + traj.id +
                                 "' has duplicate step t=" +
                                 std::to_string(traj.steps[i].t));
      }
    }
  }
  return out;
}

}  // namespace detail

inline std::vector<Trajectory> load_trajectories(
    const std::filesystem::path& path,
    TrajectoryFormat format = TrajectoryFormat::jsonl) {
  const std::string text = read_file(path);
  std::vector<std::pair<std::string, TrajectoryStep>> rows;

  std::istringstream in(text);
  std::string line;
  long line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where =
        path.string() + ": line " + std::to_string(line_no);
    if (format == TrajectoryFormat::jsonl) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(where + ": parse error: " + e.what());
      }
      std::string id;
      TrajectoryStep s = detail::step_from_json(j, where, id);
      rows.emplace_back(std::move(id), s);
    } else {
      if (!saw_header) {
        if (line != kCsvHeader) {
          throw std::runtime_error(where + ": expected header '" +
                                   std::string(kCsvHeader) + "'");
        }
        saw_header = true;
        continue;
      }
      const auto fields = split_csv_row(line);
      if (fields.size() != 9) {
        throw std::runtime_error(where + ": expected 9 fields, got " +
                                 std::to_string(fields.size()));
      }
      TrajectoryStep s;
      s.t = parse_long(fields[1], where + ": t");
      s.object_pose.position = {parse_double(fields[2], where + ": po_x"),
                                parse_double(fields[3], where + ": po_y")};
      s.object_pose.orientation = parse_double(fields[4], where + ": omega");
      s.robot_pos = {parse_double(fields[5], where + ": pr_x"),
                     parse_double(fields[6], where + ": pr_y")};
      s.robot_motion = {parse_double(fields[7], where + ": ur_x"),
                        parse_double(fields[8], where + ": ur_y")};
      rows.emplace_back(std::string(fields[0]), s);
    }
  }
  return detail::group_rows(std::move(rows), path.string());
}

inline void save_trajectories(const std::filesystem::path& path,
                              std::span<const Trajectory> trajectories,
                              TrajectoryFormat format = TrajectoryFormat::jsonl) {
  std::string out;
  if (format == TrajectoryFormat::csv) {
    out.append(kCsvHeader);
    out.push_back('\n');
  }
  for (const auto& traj : trajectories) {
    for (const auto& s : traj.steps) {
      if (format == TrajectoryFormat::jsonl) {
        nlohmann::json j;
        j["traj_id"] = traj.id;
        j["t"] = s.t;
        j["po_x"] = s.object_pose.position.x;
        j["po_y"] = s.object_pose.position.y;
        j["omega"] = s.object_pose.orientation;
        j["pr_x"] = s.robot_pos.x;
        j["pr_y"] = s.robot_pos.y;
        j["ur_x"] = s.robot_motion.x;
        j["ur_y"] = s.robot_motion.y;
        out.append(j.dump());
      } else {
        out.append(traj.id);
        out.push_back(',');
        out.append(std::to_string(s.t));
        for (double v :
             {s.object_pose.position.x, s.object_pose.position.y,
              s.object_pose.orientation, s.robot_pos.x, s.robot_pos.y,
              s.robot_motion.x, s.robot_motion.y}) {
          out.push_back(',');
          out.append(format_double(v));
        }
      }
      out.push_back('\n');
    }
  }
  write_file(path, out);
}

// Builds supervised pairs over a prediction horizon: the input motion is the
// robot's cumulative world motion over the horizon rotated into the frame at
// t, the target is the object displacement from t to t+horizon.
inline std::vector<SupervisedPair> to_pairs(const Trajectory& traj,
                                            int horizon = 1) {
  if (horizon < 1) {
    throw std::invalid_argument("to_pairs: horizon must be >= 1");
  }
  if (traj.steps.size() <= static_cast<std::size_t>(horizon)) {
    throw std::invalid_argument("to_pairs: trajectory '" + traj.id +
                                "' too short for horizon " +
                                std::to_string(horizon));
  }
  std::vector<SupervisedPair> pairs;
  pairs.reserve(traj.steps.size() - horizon);
  for (std::size_t t = 0; t + horizon < traj.steps.size(); ++t) {
    Vec2 motion{0.0, 0.0};
    for (std::size_t k = 0; k < static_cast<std::size_t>(horizon); ++k) {
      motion += traj.steps[t + k].robot_motion;
    }
    SupervisedPair pair;
    pair.x = to_object_frame(traj.steps[t].object_pose,
                             traj.steps[t].robot_pos, motion);
    pair.y = outcome_to_object_frame(traj.steps[t].object_pose,
                                     traj.steps[t + horizon].object_pose);
    pairs.push_back(pair);
  }
  return pairs;
}

inline std::vector<SupervisedPair> to_pairs(
    std::span<const Trajectory> trajectories, int horizon = 1) {
  std::vector<SupervisedPair> pairs;
  for (const auto& traj : trajectories) {
    auto p = to_pairs(traj, horizon);
    pairs.insert(pairs.end(), p.begin(), p.end());
  }
  return pairs;
}

// Population statistics; the displacement std pools the squared deviations
// of both components around their own means, so the mean predictor scores
// NMSE exactly 1 on the fitting set.
inline NormStats fit_norm_stats(std::span<const SupervisedPair> pairs) {
  if (pairs.size() < 2) {
    throw std::invalid_argument("fit_norm_stats: need at least 2 pairs");
  }
  const double n = static_cast<double>(pairs.size());
  NormStats s{};
  for (const auto& p : pairs) {
    s.mean_robot_pos += p.x.robot_pos;
    s.mean_robot_motion += p.x.robot_motion;
    s.mean_dp += p.y.dp;
    s.mean_dw += p.y.dw;
  }
  s.mean_robot_pos = s.mean_robot_pos * (1.0 / n);
  s.mean_robot_motion = s.mean_robot_motion * (1.0 / n);
  s.mean_dp = s.mean_dp * (1.0 / n);
  s.mean_dw /= n;

  Vec2 var_pos, var_motion, var_dp;
  double var_dw = 0.0;
  for (const auto& p : pairs) {
    const Vec2 dpos = p.x.robot_pos - s.mean_robot_pos;
    const Vec2 dmot = p.x.robot_motion - s.mean_robot_motion;
    const Vec2 ddp = p.y.dp - s.mean_dp;
    var_pos += {dpos.x * dpos.x, dpos.y * dpos.y};
    var_motion += {dmot.x * dmot.x, dmot.y * dmot.y};
    var_dp += {ddp.x * ddp.x, ddp.y * ddp.y};
    var_dw += (p.y.dw - s.mean_dw) * (p.y.dw - s.mean_dw);
  }
  s.std_robot_pos = {std::sqrt(var_pos.x / n), std::sqrt(var_pos.y / n)};
  s.std_robot_motion = {std::sqrt(var_motion.x / n),
                        std::sqrt(var_motion.y / n)};
  s.std_dp = std::sqrt((var_dp.x + var_dp.y) / (2.0 * n));
  s.std_dw = std::sqrt(var_dw / n);

  const std::pair<const char*, double> checks[] = {
      {"p_r^o.x", s.std_robot_pos.x},   {"p_r^o.y", s.std_robot_pos.y},
      {"u_r^o.x", s.std_robot_motion.x}, {"u_r^o.y", s.std_robot_motion.y},
      {"dp_o", s.std_dp},               {"dw_o", s.std_dw}};
  for (const auto& [name, std] : checks) {
    if (!(std > 0.0)) {
      throw std::runtime_error(
          std::string("fit_norm_stats: degenerate variance in ") + name);
    }
  }
  return s;
}

// Deterministic split at trajectory granularity.
inline std::pair<std::vector<Trajectory>, std::vector<Trajectory>>
split_dataset(std::span<const Trajectory> trajectories, double fraction,
              std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("split_dataset: fraction must be in (0, 1)");
  }
  if (trajectories.size() < 2) {
    throw std::invalid_argument(
        "split_dataset: need at least 2 trajectories");
  }
  std::vector<std::size_t> order(trajectories.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(derive_seed(seed, 0x5917));
  rng.shuffle(order);

  auto n_train = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(trajectories.size())));
  n_train = std::clamp<std::size_t>(n_train, 1, trajectories.size() - 1);

  std::pair<std::vector<Trajectory>, std::vector<Trajectory>> out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_train ? out.first : out.second)
        .push_back(trajectories[order[i]]);
  }
  return out;
}

}  // namespace pushpred
