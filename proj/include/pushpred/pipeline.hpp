#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pushpred/checkpoint.hpp"
#include "pushpred/data.hpp"
#include "pushpred/io.hpp"
#include "pushpred/metrics.hpp"
#include "pushpred/model.hpp"
#include "pushpred/nn.hpp"
#include "pushpred/optim.hpp"

namespace pushpred {

struct OfflineConfig {
  int epochs = 200;
  int batch_size = 32;
  double lr = 0.005;
  std::uint64_t seed = 0;
  bool shuffle = true;
  // optional scheme: also descend theta_online during offline training
  bool train_online_params_offline = false;
  OnlineParams initial_online = OnlineParams::with_h({0.0, 0.0}, 0.05);

  void validate() const {
    if (epochs < 0 || batch_size < 1 || !(lr > 0.0)) {
      throw std::invalid_argument("OfflineConfig: invalid hyperparameters");
    }
  }
};

struct TrainResult {
  CombinedModel model;
  std::vector<double> epoch_loss;  // mean total loss per epoch
  double final_mean_loss = 0.0;    // mean total loss on the training set
  NmseSummary train_nmse;
};

namespace detail {

inline void check_finite(double loss, int epoch, std::size_t sample) {
  if (!std::isfinite(loss)) {
    throw std::runtime_error(
        "offline_train: non-finite loss at epoch " + std::to_string(epoch) +
        ", sample " + std::to_string(sample));
  }
}

}  // namespace detail

// Offline pre-training: fits normalization statistics on the dataset, then
// minimizes the mean normalized loss over theta_offline with Adam.
// theta_online stays frozen at its initial value unless the optional scheme
// is enabled.
inline TrainResult offline_train(std::span<const SupervisedPair> dataset,
                                 const OfflineConfig& config) {
  config.validate();
  if (dataset.empty()) {
    throw std::invalid_argument("offline_train: empty dataset");
  }

  TrainResult result;
  result.model.norm = fit_norm_stats(dataset);
  result.model.mlp =
      mlp_init(combined_mlp_dims(), derive_seed(config.seed, 1));
  result.model.online = config.initial_online;

  CombinedModel& model = result.model;
  const std::size_t n_mlp = model.mlp.param_count();
  const bool online_too = config.train_online_params_offline;
  const std::size_t n_params = n_mlp + (online_too ? 3 : 0);

  std::vector<double> params = flatten(model.mlp);
  if (online_too) {
    params.push_back(model.online.v.x);
    params.push_back(model.online.v.y);
    params.push_back(model.online.rho);
  }
  AdamState adam(n_params, AdamConfig{.lr = config.lr});
  Rng shuffle_rng(derive_seed(config.seed, 2));

  std::vector<std::size_t> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<double> grad(n_params, 0.0);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.shuffle) shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += config.batch_size) {
      const std::size_t stop =
          std::min(order.size(), start + config.batch_size);
      grad.assign(n_params, 0.0);
      const double inv_batch = 1.0 / static_cast<double>(stop - start);
      for (std::size_t k = start; k < stop; ++k) {
        const SupervisedPair& sample = dataset[order[k]];
        CombinedTape tape;
        const PushOutcome pred = combined_forward(model, sample.x, &tape);
        const LossBreakdown loss = step_loss(pred, sample.y, model.norm);
        detail::check_finite(loss.total, epoch, order[k]);
        epoch_loss += loss.total;
        const LossGrad lg = step_loss_grad(pred, sample.y, model.norm);
        const CombinedGrads grads = combined_backward(model, tape, lg);
        std::size_t gi = 0;
        for (const auto& l : grads.mlp.layers) {
          for (double w : l.w) grad[gi++] += inv_batch * w;
          for (double b : l.b) grad[gi++] += inv_batch * b;
        }
        if (online_too) {
          grad[n_mlp + 0] += inv_batch * grads.online.d_v.x;
          grad[n_mlp + 1] += inv_batch * grads.online.d_v.y;
          grad[n_mlp + 2] += inv_batch * grads.online.d_rho;
        }
      }
      adam_step(adam, params, grad);
      unflatten(std::span(params.data(), n_mlp), model.mlp);
      if (online_too) {
        model.online.v = {params[n_mlp], params[n_mlp + 1]};
        model.online.rho = params[n_mlp + 2];
      }
    }
    result.epoch_loss.push_back(epoch_loss /
                                static_cast<double>(dataset.size()));
  }

  // final evaluation on the training set
  std::vector<LossBreakdown> losses;
  losses.reserve(dataset.size());
  double total = 0.0;
  for (const auto& sample : dataset) {
    const PushOutcome pred = combined_forward(model, sample.x);
    losses.push_back(step_loss(pred, sample.y, model.norm));
    total += losses.back().total;
  }
  result.final_mean_loss = total / static_cast<double>(dataset.size());
  result.train_nmse = nmse_summary(losses);
  return result;
}

struct BaselineTrainResult {
  MlpParams params;
  std::vector<double> epoch_loss;
  double final_mean_loss = 0.0;
  NmseSummary train_nmse;
};

// Trains the pure neural network baseline on the same normalized loss; the
// squared error in z-space equals the normalized loss exactly, so both
// models optimize the same objective.
inline BaselineTrainResult train_baseline_nn(
    std::span<const SupervisedPair> dataset, const OfflineConfig& config,
    const NormStats& norm) {
  config.validate();
  if (dataset.empty()) {
    throw std::invalid_argument("train_baseline_nn: empty dataset");
  }
  BaselineTrainResult result;
  result.params = mlp_init(baseline_mlp_dims(), derive_seed(config.seed, 3));
  MlpParams& mlp = result.params;

  std::vector<double> params = flatten(mlp);
  AdamState adam(params.size(), AdamConfig{.lr = config.lr});
  Rng shuffle_rng(derive_seed(config.seed, 4));

  std::vector<std::size_t> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<double> grad(params.size(), 0.0);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.shuffle) shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += config.batch_size) {
      const std::size_t stop =
          std::min(order.size(), start + config.batch_size);
      grad.assign(params.size(), 0.0);
      const double inv_batch = 1.0 / static_cast<double>(stop - start);
      for (std::size_t k = start; k < stop; ++k) {
        const SupervisedPair& sample = dataset[order[k]];
        const auto zin = baseline_normalize_input(norm, sample.x);
        const auto ztarget = baseline_normalize_target(norm, sample.y);
        MlpTape tape;
        const std::vector<double> zout = mlp_forward(mlp, zin, &tape);
        std::array<double, 3> out_grad{};
        double loss = 0.0;
        for (int i = 0; i < 3; ++i) {
          const double e = zout[i] - ztarget[i];
          loss += e * e;
          out_grad[i] = 2.0 * e;
        }
        detail::check_finite(loss, epoch, order[k]);
        epoch_loss += loss;
        const MlpBackwardResult bw = mlp_backward(mlp, tape, out_grad);
        std::size_t gi = 0;
        for (const auto& l : bw.param_grads.layers) {
          for (double w : l.w) grad[gi++] += inv_batch * w;
          for (double b : l.b) grad[gi++] += inv_batch * b;
        }
      }
      adam_step(adam, params, grad);
      unflatten(params, mlp);
    }
    result.epoch_loss.push_back(epoch_loss /
                                static_cast<double>(dataset.size()));
  }

  std::vector<LossBreakdown> losses;
  losses.reserve(dataset.size());
  double total = 0.0;
  for (const auto& sample : dataset) {
    const PushOutcome pred = baseline_nn_forward(mlp, norm, sample.x);
    losses.push_back(step_loss(pred, sample.y, norm));
    total += losses.back().total;
  }
  result.final_mean_loss = total / static_cast<double>(dataset.size());
  result.train_nmse = nmse_summary(losses);
  return result;
}

struct OnlineOptions {
  SgdConfig sgd;
  bool reset_per_trajectory = false;
  // Descent basis for v: the online parameter vector is (v/v_step_scale,
  // rho), so one unit of any coordinate means a comparable model change and
  // the shared learning rate conditions all three directions alike. Gradients
  // stay exact through the chain rule; only the optimizer's metric changes.
  double v_step_scale = 0.15;
};

struct OnlineRunResult {
  std::vector<LossBreakdown> online_losses;
  std::vector<LossBreakdown> fixed_losses;
  std::vector<LossBreakdown> nn_losses;
  std::vector<OnlineParams> online_history;  // after each update
  OnlineParams final_online;
  NmseSummary online_nmse, fixed_nmse, nn_nmse;
};

// Online adaptation: at each step the current model predicts first, losses
// are recorded for the adapting, fixed, and pure-NN models, and only then is
// theta_online updated by steps_per_update gradient steps on that sample.
// theta_offline is never touched. theta_online carries across trajectories
// unless reset_per_trajectory is set.
inline OnlineRunResult online_adapt(
    const CombinedModel& model, const MlpParams* baseline,
    std::span<const std::vector<SupervisedPair>> trajectories,
    const OnlineOptions& options) {
  model.validate();
  OnlineRunResult result;
  CombinedModel adapting = model;

  std::size_t step_index = 0;
  for (const auto& stream : trajectories) {
    if (options.reset_per_trajectory) adapting.online = model.online;
    for (const auto& sample : stream) {
      // predict before the outcome is used anywhere
      const PushOutcome pred = combined_forward(adapting, sample.x);
      const LossBreakdown online_loss =
          step_loss(pred, sample.y, model.norm);
      if (!std::isfinite(online_loss.total)) {
        throw std::runtime_error("online_adapt: non-finite loss at step " +
                                 std::to_string(step_index));
      }
      result.online_losses.push_back(online_loss);

      const PushOutcome fixed_pred = combined_forward(model, sample.x);
      result.fixed_losses.push_back(
          step_loss(fixed_pred, sample.y, model.norm));
      if (baseline) {
        const PushOutcome nn_pred =
            baseline_nn_forward(*baseline, model.norm, sample.x);
        result.nn_losses.push_back(
            step_loss(nn_pred, sample.y, model.norm));
      }

      // gradient-descent steps on this sample, theta_online only
      const double s_v = options.v_step_scale;
      if (!(s_v > 0.0)) {
        throw std::invalid_argument("online_adapt: v_step_scale must be > 0");
      }
      std::array<double, 3> theta = {adapting.online.v.x / s_v,
                                     adapting.online.v.y / s_v,
                                     adapting.online.rho};
      sgd_steps(options.sgd, theta,
                [&](std::span<const double> p, std::span<double> g) {
                  adapting.online.v = {p[0] * s_v, p[1] * s_v};
                  adapting.online.rho = p[2];
                  CombinedTape tape;
                  const PushOutcome pr =
                      combined_forward(adapting, sample.x, &tape);
                  const LossGrad lg =
                      step_loss_grad(pr, sample.y, model.norm);
                  const CombinedGrads grads =
                      combined_backward(adapting, tape, lg);
                  g[0] = grads.online.d_v.x * s_v;
                  g[1] = grads.online.d_v.y * s_v;
                  g[2] = grads.online.d_rho;
                });
      adapting.online.v = {theta[0] * s_v, theta[1] * s_v};
      adapting.online.rho = theta[2];
      result.online_history.push_back(adapting.online);
      ++step_index;
    }
  }
  if (result.online_losses.empty()) {
    throw std::invalid_argument("online_adapt: empty stream");
  }
  result.final_online = adapting.online;
  result.online_nmse = nmse_summary(result.online_losses);
  result.fixed_nmse = nmse_summary(result.fixed_losses);
  if (baseline) result.nn_nmse = nmse_summary(result.nn_losses);
  return result;
}

// ---- experiment artifacts ----

inline void write_training_curve_csv(const std::filesystem::path& path,
                                     std::span<const double> epoch_loss) {
  std::string out = "epoch,mean_loss\n";
  for (std::size_t i = 0; i < epoch_loss.size(); ++i) {
    out += std::to_string(i);
    out.push_back(',');
    out += format_double(epoch_loss[i]);
    out.push_back('\n');
  }
  write_file(path, out);
}

inline void write_loss_csv(const std::filesystem::path& path,
                           const OnlineRunResult& run) {
  std::string out = "step,model,pos_x,pos_y,rot,total\n";
  const auto row = [&out](std::size_t step, const char* name,
                          const LossBreakdown& l) {
    out += std::to_string(step);
    out.push_back(',');
    out += name;
    for (double v : {l.pos_x, l.pos_y, l.rot, l.total}) {
      out.push_back(',');
      out += format_double(v);
    }
    out.push_back('\n');
  };
  for (std::size_t i = 0; i < run.online_losses.size(); ++i) {
    row(i, "online", run.online_losses[i]);
    row(i, "fixed", run.fixed_losses[i]);
    if (!run.nn_losses.empty()) row(i, "nn", run.nn_losses[i]);
  }
  write_file(path, out);
}

// Summary mirroring the four model columns: offline NN, offline combined,
// fixed, online -- positional then rotational.
inline void write_summary_csv(const std::filesystem::path& path,
                              const std::string& experiment,
                              const NmseSummary& offline_nn,
                              const NmseSummary& offline,
                              const OnlineRunResult& run) {
  std::string out =
      "experiment,offline_nn_pos,offline_pos,fixed_pos,online_pos,"
      "offline_nn_rot,offline_rot,fixed_rot,online_rot\n";
  out += experiment;
  for (double v : {offline_nn.pos, offline.pos, run.fixed_nmse.pos,
                   run.online_nmse.pos, offline_nn.rot, offline.rot,
                   run.fixed_nmse.rot, run.online_nmse.rot}) {
    out.push_back(',');
    out += format_double(v);
  }
  out.push_back('\n');
  write_file(path, out);
}

struct ExperimentConfig {
  OfflineConfig offline;
  OnlineOptions online;
  int horizon = 1;
  std::string label = "synthetic_shift";
};

struct ExperimentResult {
  TrainResult train;
  BaselineTrainResult baseline;
  OnlineRunResult online;
};

inline Checkpoint make_checkpoint(const TrainResult& train,
                                  const BaselineTrainResult& baseline,
                                  const ExperimentConfig& config) {
  Checkpoint ckpt;
  ckpt.mlp = train.model.mlp;
  ckpt.baseline_mlp = baseline.params;
  ckpt.online = train.model.online;
  ckpt.norm = train.model.norm;
  ckpt.provenance.seed = config.offline.seed;
  ckpt.provenance.config_hash = fnv1a_hex(
      "epochs=" + std::to_string(config.offline.epochs) +
      ";batch=" + std::to_string(config.offline.batch_size) +
      ";lr=" + format_double(config.offline.lr) +
      ";seed=" + std::to_string(config.offline.seed) +
      ";horizon=" + std::to_string(config.horizon) +
      ";online_offline=" +
      std::to_string(config.offline.train_online_params_offline));
  ckpt.provenance.offline_total_loss = train.final_mean_loss;
  ckpt.provenance.offline_nmse = train.train_nmse;
  ckpt.provenance.baseline_nmse = baseline.train_nmse;
  return ckpt;
}

// Full protocol: offline pre-training on one suite, online adaptation across
// the other, artifact files into out_dir.
inline ExperimentResult run_experiment(
    std::span<const Trajectory> offline_trajs,
    std::span<const Trajectory> online_trajs, const ExperimentConfig& config,
    const std::filesystem::path& out_dir) {
  const std::vector<SupervisedPair> offline_pairs =
      to_pairs(offline_trajs, config.horizon);

  ExperimentResult result;
  result.train = offline_train(offline_pairs, config.offline);
  result.baseline = train_baseline_nn(offline_pairs, config.offline,
                                      result.train.model.norm);

  std::vector<std::vector<SupervisedPair>> online_streams;
  online_streams.reserve(online_trajs.size());
  for (const auto& traj : online_trajs) {
    online_streams.push_back(to_pairs(traj, config.horizon));
  }
  result.online = online_adapt(result.train.model, &result.baseline.params,
                               online_streams, config.online);

  std::filesystem::create_directories(out_dir);
  write_training_curve_csv(out_dir / "training_curve.csv",
                           result.train.epoch_loss);
  write_loss_csv(out_dir / "losses.csv", result.online);
  write_summary_csv(out_dir / "summary.csv", config.label,
                    result.baseline.train_nmse, result.train.train_nmse,
                    result.online);
  Checkpoint ckpt = make_checkpoint(result.train, result.baseline, config);
  ckpt.online = result.online.final_online;
  checkpoint_save(out_dir / "checkpoint.json", ckpt);
  return result;
}

}  // namespace pushpred
