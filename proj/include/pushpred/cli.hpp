#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pushpred/checkpoint.hpp"
#include "pushpred/data.hpp"
#include "pushpred/pipeline.hpp"
#include "pushpred/plot.hpp"
#include "pushpred/simulator.hpp"

namespace pushpred {

struct SimulateOptions {
  std::filesystem::path out_dir = "data";
  std::uint64_t seed = 0;
  // reference scene; the online suite uses it exactly
  double box_half_x = 0.35;
  double box_half_y = 0.3;
  double robot_radius = 0.1;
  double step_length = 0.012;
  double true_h = 0.05;
  double offline_vx = 0.0;
  double offline_vy = 0.0;
  double online_vx = 0.01;
  double online_vy = 0.01;
  double noise_pos = 0.0005;
  double noise_rot = 0.0015;
  double slip_noise = 0.0;
  // offline suite: size_count box-size variants, scripts_per_size pushes
  // each, sides cycling; the size spread teaches the network how contact
  // responds to shifts along the side normal
  int size_count = 12;
  int scripts_per_size = 4;
  int offline_steps = 50;
  double size_frac_lo = 0.75;
  double size_frac_hi = 1.05;
  // online suite: short pushes cycling through the four sides
  int online_count = 20;
  int online_steps = 40;
  // push variety
  double offset_frac_lo = 0.15;
  double offset_frac_hi = 0.5;
  double angle_max = 0.15;

  SceneConfig reference_scene() const {
    SceneConfig s;
    s.box_half_extents = {box_half_x, box_half_y};
    s.robot_radius = robot_radius;
    s.step_length = step_length;
    s.true_h = true_h;
    s.noise_std_pos = noise_pos;
    s.noise_std_rot = noise_rot;
    s.slip_noise = slip_noise;
    return s;
  }
};

namespace detail {

inline PushScript draw_script(Rng& rng, BoxSide side, double side_half,
                              int steps, const SimulateOptions& opt) {
  const double mag =
      rng.uniform(opt.offset_frac_lo, opt.offset_frac_hi) * side_half;
  const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
  return {side, sign * mag, rng.uniform(-opt.angle_max, opt.angle_max),
          steps};
}

inline constexpr BoxSide kSideCycle[4] = {BoxSide::bottom, BoxSide::left,
                                          BoxSide::top, BoxSide::right};

}  // namespace detail

// Offline training suite: box sizes swept densely across
// [size_frac_lo, size_frac_hi] of the reference extents, four pushes per
// size, one per side.
inline std::vector<SuiteEntry> offline_suite_entries(
    const SimulateOptions& opt) {
  const SceneConfig base = opt.reference_scene();
  base.validate();
  std::vector<SuiteEntry> entries;
  Rng rng(derive_seed(opt.seed, 20));
  for (int k = 0; k < opt.size_count; ++k) {
    SceneConfig scene = base;
    scene.true_v = {opt.offline_vx, opt.offline_vy};
    const double frac =
        opt.size_count == 1
            ? opt.size_frac_lo
            : opt.size_frac_lo + (opt.size_frac_hi - opt.size_frac_lo) * k /
                                     (opt.size_count - 1);
    scene.box_half_extents = {
        base.box_half_extents.x * frac + rng.uniform(-0.004, 0.004),
        base.box_half_extents.y * frac + rng.uniform(-0.004, 0.004)};
    for (int j = 0; j < opt.scripts_per_size; ++j) {
      const BoxSide side = detail::kSideCycle[j % 4];
      const double half = (side == BoxSide::bottom || side == BoxSide::top)
                              ? scene.box_half_extents.x
                              : scene.box_half_extents.y;
      entries.push_back(
          {"", scene,
           detail::draw_script(rng, side, half, opt.offline_steps, opt)});
    }
  }
  return entries;
}

// Online adaptation suite: short pushes on the reference box with the
// online COM offset, consecutive trajectories cycling the pushing side.
inline std::vector<SuiteEntry> online_suite_entries(
    const SimulateOptions& opt) {
  SceneConfig scene = opt.reference_scene();
  scene.true_v = {opt.online_vx, opt.online_vy};
  scene.validate();
  std::vector<SuiteEntry> entries;
  Rng rng(derive_seed(opt.seed, 21));
  for (int i = 0; i < opt.online_count; ++i) {
    const BoxSide side = detail::kSideCycle[i % 4];
    const double half = (side == BoxSide::bottom || side == BoxSide::top)
                            ? scene.box_half_extents.x
                            : scene.box_half_extents.y;
    entries.push_back(
        {"", scene,
         detail::draw_script(rng, side, half, opt.online_steps, opt)});
  }
  return entries;
}

// Writes out_dir/offline and out_dir/online suites, each with a manifest.
inline void cmd_simulate(const SimulateOptions& opt) {
  const auto offline = offline_suite_entries(opt);
  const auto online = online_suite_entries(opt);
  generate_suite(offline, opt.out_dir / "offline", derive_seed(opt.seed, 10),
                 "offline");
  generate_suite(online, opt.out_dir / "online", derive_seed(opt.seed, 11),
                 "online");
  std::cout << "wrote " << offline.size() << " offline and " << online.size()
            << " online trajectories under " << opt.out_dir.string() << "\n";
}

// Accepts a manifest.json, a directory holding one (or *.jsonl files), or a
// single trajectory file.
inline std::vector<Trajectory> load_trajectories_any(
    const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  if (fs::is_directory(path)) {
    if (fs::exists(path / "manifest.json")) {
      return load_suite(path / "manifest.json");
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.path().extension() == ".jsonl") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
      throw std::runtime_error("no .jsonl trajectories in " + path.string());
    }
    std::vector<Trajectory> out;
    for (const auto& f : files) {
      auto t = load_trajectories(f);
      out.insert(out.end(), t.begin(), t.end());
    }
    return out;
  }
  if (path.extension() == ".json") return load_suite(path);
  if (path.extension() == ".csv") {
    return load_trajectories(path, TrajectoryFormat::csv);
  }
  return load_trajectories(path);
}

struct TrainOptions {
  std::filesystem::path data;
  std::filesystem::path out_dir = "runs/train";
  int epochs = 200;
  int batch_size = 32;
  double lr = 0.005;
  std::uint64_t seed = 0;
  bool no_shuffle = false;
  bool train_online_params = false;
  int horizon = 1;
  double init_vx = 0.0;
  double init_vy = 0.0;
  double init_h = 0.05;
};

inline void cmd_train(const TrainOptions& opt) {
  const auto trajectories = load_trajectories_any(opt.data);
  const auto pairs = to_pairs(trajectories, opt.horizon);

  ExperimentConfig config;
  config.offline.epochs = opt.epochs;
  config.offline.batch_size = opt.batch_size;
  config.offline.lr = opt.lr;
  config.offline.seed = opt.seed;
  config.offline.shuffle = !opt.no_shuffle;
  config.offline.train_online_params_offline = opt.train_online_params;
  config.offline.initial_online =
      OnlineParams::with_h({opt.init_vx, opt.init_vy}, opt.init_h);
  config.horizon = opt.horizon;

  const TrainResult train = offline_train(pairs, config.offline);
  const BaselineTrainResult baseline =
      train_baseline_nn(pairs, config.offline, train.model.norm);

  std::filesystem::create_directories(opt.out_dir);
  write_training_curve_csv(opt.out_dir / "training_curve.csv",
                           train.epoch_loss);
  checkpoint_save(opt.out_dir / "checkpoint.json",
                  make_checkpoint(train, baseline, config));
  std::cout << "trained on " << pairs.size() << " pairs; "
            << "combined nmse pos " << format_double(train.train_nmse.pos)
            << " rot " << format_double(train.train_nmse.rot)
            << "; baseline nmse pos "
            << format_double(baseline.train_nmse.pos) << " rot "
            << format_double(baseline.train_nmse.rot) << "\n";
}

struct AdaptOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path data;
  std::filesystem::path out_dir = "runs/adapt";
  double lr = 0.005;
  int steps_per_update = 5;
  double max_grad_norm = 0.0;
  double v_step_scale = 0.15;
  bool reset_per_trajectory = false;
  int horizon = 1;
  std::string label = "synthetic_shift";
};

inline void cmd_adapt(const AdaptOptions& opt) {
  Checkpoint ckpt = checkpoint_load(opt.checkpoint);
  CombinedModel model{ckpt.mlp, ckpt.online, ckpt.norm};

  const auto trajectories = load_trajectories_any(opt.data);
  std::vector<std::vector<SupervisedPair>> streams;
  streams.reserve(trajectories.size());
  for (const auto& traj : trajectories) {
    streams.push_back(to_pairs(traj, opt.horizon));
  }

  OnlineOptions online;
  online.sgd.lr = opt.lr;
  online.sgd.steps_per_update = opt.steps_per_update;
  online.sgd.max_grad_norm = opt.max_grad_norm;
  online.v_step_scale = opt.v_step_scale;
  online.reset_per_trajectory = opt.reset_per_trajectory;

  const MlpParams* baseline =
      ckpt.baseline_mlp ? &*ckpt.baseline_mlp : nullptr;
  const OnlineRunResult run =
      online_adapt(model, baseline, streams, online);

  std::filesystem::create_directories(opt.out_dir);
  write_loss_csv(opt.out_dir / "losses.csv", run);
  write_summary_csv(opt.out_dir / "summary.csv", opt.label,
                    ckpt.provenance.baseline_nmse, ckpt.provenance.offline_nmse,
                    run);
  Checkpoint adapted = ckpt;
  adapted.online = run.final_online;
  checkpoint_save(opt.out_dir / "adapted_checkpoint.json", adapted);
  std::cout << "adapted over " << run.online_losses.size()
            << " steps; online nmse pos " << format_double(run.online_nmse.pos)
            << " rot " << format_double(run.online_nmse.rot)
            << "; fixed nmse pos " << format_double(run.fixed_nmse.pos)
            << " rot " << format_double(run.fixed_nmse.rot) << "\n";
}

struct EvalOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path data;
  std::optional<std::filesystem::path> out;
  int horizon = 1;
  std::string label = "eval";
};

// Evaluates a checkpoint on a dataset with no adaptation.
inline void cmd_eval(const EvalOptions& opt) {
  const Checkpoint ckpt = checkpoint_load(opt.checkpoint);
  const CombinedModel model{ckpt.mlp, ckpt.online, ckpt.norm};
  model.validate();
  const auto trajectories = load_trajectories_any(opt.data);
  const auto pairs = to_pairs(trajectories, opt.horizon);

  std::vector<LossBreakdown> combined_losses, nn_losses;
  for (const auto& p : pairs) {
    combined_losses.push_back(
        step_loss(combined_forward(model, p.x), p.y, model.norm));
    if (ckpt.baseline_mlp) {
      nn_losses.push_back(step_loss(
          baseline_nn_forward(*ckpt.baseline_mlp, model.norm, p.x), p.y,
          model.norm));
    }
  }
  const NmseSummary combined = nmse_summary(combined_losses);
  std::cout << "combined nmse pos " << format_double(combined.pos) << " rot "
            << format_double(combined.rot) << " over " << pairs.size()
            << " pairs\n";
  std::string out =
      "experiment,model,nmse_pos,nmse_rot\n" + opt.label + ",combined," +
      format_double(combined.pos) + "," + format_double(combined.rot) + "\n";
  if (!nn_losses.empty()) {
    const NmseSummary nn = nmse_summary(nn_losses);
    std::cout << "baseline nmse pos " << format_double(nn.pos) << " rot "
              << format_double(nn.rot) << "\n";
    out += opt.label + ",nn," + format_double(nn.pos) + "," +
           format_double(nn.rot) + "\n";
  }
  if (opt.out) write_file(*opt.out, out);
}

struct PlotOptions {
  std::filesystem::path input;
  std::filesystem::path out_prefix = "plots/loss";
  std::optional<double> offline_loss;
  int window = 10;
};

inline void cmd_plot(const PlotOptions& opt) {
  const auto written =
      write_loss_plots(opt.input, opt.out_prefix, opt.offline_loss,
                       opt.window);
  for (const auto& p : written) std::cout << "wrote " << p.string() << "\n";
}

}  // namespace pushpred
