#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pushpred/io.hpp"
#include "pushpred/metrics.hpp"
#include "pushpred/model.hpp"
#include "pushpred/nn.hpp"
#include "pushpred/physics.hpp"

namespace pushpred {

inline constexpr int kCheckpointVersion = 1;

struct CheckpointCorruptError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CheckpointVersionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CheckpointShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CheckpointProvenance {
  std::uint64_t seed = 0;
  std::string config_hash;
  double offline_total_loss = 0.0;
  NmseSummary offline_nmse;
  NmseSummary baseline_nmse;
};

// Self-describing container for a trained model: named, shaped parameter
// arrays plus the normalization statistics and provenance. The pure-NN
// baseline rides along so adaptation runs can report its losses.
struct Checkpoint {
  MlpParams mlp;
  std::optional<MlpParams> baseline_mlp;
  OnlineParams online;
  NormStats norm;
  CheckpointProvenance provenance;
};

// FNV-1a, used to fingerprint configurations in provenance
inline std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

namespace detail {

inline nlohmann::json mlp_to_json(const MlpParams& p) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : p.layers) {
    layers.push_back(
        {{"in", l.in_dim}, {"out", l.out_dim}, {"w", l.w}, {"b", l.b}});
  }
  return layers;
}

inline MlpParams mlp_from_json(const nlohmann::json& j,
                               const std::string& what) {
  MlpParams p;
  for (const auto& lj : j) {
    LayerParams l;
    l.in_dim = lj.at("in").get<int>();
    l.out_dim = lj.at("out").get<int>();
    l.w = lj.at("w").get<std::vector<double>>();
    l.b = lj.at("b").get<std::vector<double>>();
    if (l.in_dim <= 0 || l.out_dim <= 0 ||
        l.w.size() != static_cast<std::size_t>(l.in_dim) * l.out_dim ||
        l.b.size() != static_cast<std::size_t>(l.out_dim)) {
      throw CheckpointShapeError(what + ": layer array sizes disagree with " +
                                 "declared dims");
    }
    if (!p.layers.empty() && p.layers.back().out_dim != l.in_dim) {
      throw CheckpointShapeError(what + ": layer dims do not chain");
    }
    p.layers.push_back(std::move(l));
  }
  return p;
}

inline void require_dims(const MlpParams& p, const std::vector<int>& dims,
                         const std::string& what) {
  bool ok = p.layers.size() + 1 == dims.size();
  if (ok) {
    for (std::size_t i = 0; i < p.layers.size(); ++i) {
      ok = ok && p.layers[i].in_dim == dims[i] &&
           p.layers[i].out_dim == dims[i + 1];
    }
  }
  if (!ok) {
    throw CheckpointShapeError(what + ": unexpected layer dimensions");
  }
}

}  // namespace detail

inline void checkpoint_save(const std::filesystem::path& path,
                            const Checkpoint& ckpt) {
  nlohmann::json j;
  j["format_version"] = kCheckpointVersion;
  j["mlp"] = detail::mlp_to_json(ckpt.mlp);
  if (ckpt.baseline_mlp) {
    j["baseline_mlp"] = detail::mlp_to_json(*ckpt.baseline_mlp);
  }
  j["online"] = {{"v_x", ckpt.online.v.x},
                 {"v_y", ckpt.online.v.y},
                 {"rho", ckpt.online.rho}};
  j["norm"] = {{"mean_pr", {ckpt.norm.mean_robot_pos.x,
                            ckpt.norm.mean_robot_pos.y}},
               {"std_pr", {ckpt.norm.std_robot_pos.x,
                           ckpt.norm.std_robot_pos.y}},
               {"mean_ur", {ckpt.norm.mean_robot_motion.x,
                            ckpt.norm.mean_robot_motion.y}},
               {"std_ur", {ckpt.norm.std_robot_motion.x,
                           ckpt.norm.std_robot_motion.y}},
               {"mean_dp", {ckpt.norm.mean_dp.x, ckpt.norm.mean_dp.y}},
               {"std_dp", ckpt.norm.std_dp},
               {"mean_dw", ckpt.norm.mean_dw},
               {"std_dw", ckpt.norm.std_dw}};
  j["provenance"] = {{"seed", ckpt.provenance.seed},
                     {"config_hash", ckpt.provenance.config_hash},
                     {"offline_total_loss",
                      ckpt.provenance.offline_total_loss},
                     {"offline_nmse_pos", ckpt.provenance.offline_nmse.pos},
                     {"offline_nmse_rot", ckpt.provenance.offline_nmse.rot},
                     {"baseline_nmse_pos", ckpt.provenance.baseline_nmse.pos},
                     {"baseline_nmse_rot", ckpt.provenance.baseline_nmse.rot}};
  write_file(path, j.dump(2) + "\n");
}

inline Checkpoint checkpoint_load(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointCorruptError("corrupt checkpoint " + path.string() +
                                 ": " + e.what());
  }
  try {
    const int version = j.at("format_version").get<int>();
    if (version != kCheckpointVersion) {
      throw CheckpointVersionError(
          "checkpoint version mismatch: file has " + std::to_string(version) +
          ", expected " + std::to_string(kCheckpointVersion));
    }
    Checkpoint ckpt;
    ckpt.mlp = detail::mlp_from_json(j.at("mlp"), "mlp");
    detail::require_dims(ckpt.mlp, combined_mlp_dims(), "mlp");
    if (j.contains("baseline_mlp")) {
      ckpt.baseline_mlp =
          detail::mlp_from_json(j.at("baseline_mlp"), "baseline_mlp");
      detail::require_dims(*ckpt.baseline_mlp, baseline_mlp_dims(),
                           "baseline_mlp");
    }
    const auto& online = j.at("online");
    ckpt.online.v = {online.at("v_x").get<double>(),
                     online.at("v_y").get<double>()};
    ckpt.online.rho = online.at("rho").get<double>();
    const auto& n = j.at("norm");
    ckpt.norm.mean_robot_pos = {n.at("mean_pr")[0].get<double>(),
                                n.at("mean_pr")[1].get<double>()};
    ckpt.norm.std_robot_pos = {n.at("std_pr")[0].get<double>(),
                               n.at("std_pr")[1].get<double>()};
    ckpt.norm.mean_robot_motion = {n.at("mean_ur")[0].get<double>(),
                                   n.at("mean_ur")[1].get<double>()};
    ckpt.norm.std_robot_motion = {n.at("std_ur")[0].get<double>(),
                                  n.at("std_ur")[1].get<double>()};
    ckpt.norm.mean_dp = {n.at("mean_dp")[0].get<double>(),
                         n.at("mean_dp")[1].get<double>()};
    ckpt.norm.std_dp = n.at("std_dp").get<double>();
    ckpt.norm.mean_dw = n.at("mean_dw").get<double>();
    ckpt.norm.std_dw = n.at("std_dw").get<double>();
    const auto& prov = j.at("provenance");
    ckpt.provenance.seed = prov.at("seed").get<std::uint64_t>();
    ckpt.provenance.config_hash = prov.at("config_hash").get<std::string>();
    ckpt.provenance.offline_total_loss =
        prov.at("offline_total_loss").get<double>();
    ckpt.provenance.offline_nmse = {prov.at("offline_nmse_pos").get<double>(),
                                    prov.at("offline_nmse_rot").get<double>()};
    ckpt.provenance.baseline_nmse = {
        prov.at("baseline_nmse_pos").get<double>(),
        prov.at("baseline_nmse_rot").get<double>()};
    return ckpt;
  } catch (const CheckpointVersionError&) {
    throw;
  } catch (const CheckpointShapeError&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointCorruptError("corrupt checkpoint " + path.string() +
                                 ": " + e.what());
  }
}

}  // namespace pushpred
