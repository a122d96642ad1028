// pushpred command line: synthetic push simulation, offline training, online
// adaptation, evaluation, and loss-curve plots.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pushpred/cli.hpp"

namespace {

void add_config_flag(CLI::App* sub) {
  sub->set_config("--config", "", "flat key=value config file; command-line "
                                  "flags override file values");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"combined analytical/neural planar push prediction"};
  app.require_subcommand(1);

  pushpred::SimulateOptions sim;
  CLI::App* simulate =
      app.add_subcommand("simulate", "generate synthetic push suites");
  add_config_flag(simulate);
  simulate->add_option("--out", sim.out_dir, "output directory");
  simulate->add_option("--seed", sim.seed, "master seed");
  simulate->add_option("--box-half-x", sim.box_half_x, "box half extent x [m]");
  simulate->add_option("--box-half-y", sim.box_half_y, "box half extent y [m]");
  simulate->add_option("--robot-radius", sim.robot_radius, "disc radius [m]");
  simulate->add_option("--step-length", sim.step_length,
                       "robot travel per step [m]");
  simulate->add_option("--true-h", sim.true_h, "true friction parameter [m]");
  simulate->add_option("--offline-vx", sim.offline_vx,
                       "offline-suite COM offset x [m]");
  simulate->add_option("--offline-vy", sim.offline_vy,
                       "offline-suite COM offset y [m]");
  simulate->add_option("--online-vx", sim.online_vx,
                       "online-suite COM offset x [m]");
  simulate->add_option("--online-vy", sim.online_vy,
                       "online-suite COM offset y [m]");
  simulate->add_option("--noise-pos", sim.noise_pos,
                       "observation noise on positions [m]");
  simulate->add_option("--noise-rot", sim.noise_rot,
                       "observation noise on orientation [rad]");
  simulate->add_option("--slip-noise", sim.slip_noise,
                       "tangential slip attenuation in [0,1)");
  simulate->add_option("--size-count", sim.size_count,
                       "offline box-size variants");
  simulate->add_option("--scripts-per-size", sim.scripts_per_size,
                       "offline pushes per size");
  simulate->add_option("--offline-steps", sim.offline_steps,
                       "steps per offline trajectory");
  simulate->add_option("--online-count", sim.online_count,
                       "online trajectories");
  simulate->add_option("--online-steps", sim.online_steps,
                       "steps per online trajectory");
  simulate->add_option("--size-frac-lo", sim.size_frac_lo,
                       "smallest offline size fraction");
  simulate->add_option("--size-frac-hi", sim.size_frac_hi,
                       "largest offline size fraction");
  simulate->add_option("--offset-frac-lo", sim.offset_frac_lo,
                       "min |start offset| as a side fraction");
  simulate->add_option("--offset-frac-hi", sim.offset_frac_hi,
                       "max |start offset| as a side fraction");
  simulate->add_option("--angle-max", sim.angle_max,
                       "max |approach angle| [rad]");

  pushpred::TrainOptions train;
  CLI::App* train_cmd =
      app.add_subcommand("train", "offline pre-training on a suite");
  add_config_flag(train_cmd);
  train_cmd->add_option("--data", train.data, "manifest, directory, or file")
      ->required();
  train_cmd->add_option("--out", train.out_dir, "output directory");
  train_cmd->add_option("--epochs", train.epochs, "training epochs");
  train_cmd->add_option("--batch-size", train.batch_size, "batch size");
  train_cmd->add_option("--lr", train.lr, "Adam learning rate");
  train_cmd->add_option("--seed", train.seed, "seed");
  train_cmd->add_flag("--no-shuffle", train.no_shuffle,
                      "keep dataset order within epochs");
  train_cmd->add_flag("--train-online-params", train.train_online_params,
                      "also descend theta_online during offline training");
  train_cmd->add_option("--horizon", train.horizon, "prediction horizon");
  train_cmd->add_option("--init-vx", train.init_vx, "initial v_x [m]");
  train_cmd->add_option("--init-vy", train.init_vy, "initial v_y [m]");
  train_cmd->add_option("--init-h", train.init_h, "initial h [m]");

  pushpred::AdaptOptions adapt;
  CLI::App* adapt_cmd =
      app.add_subcommand("adapt", "online adaptation over a stream");
  add_config_flag(adapt_cmd);
  adapt_cmd
      ->add_option("--checkpoint", adapt.checkpoint, "trained checkpoint")
      ->required();
  adapt_cmd->add_option("--data", adapt.data, "manifest, directory, or file")
      ->required();
  adapt_cmd->add_option("--out", adapt.out_dir, "output directory");
  adapt_cmd->add_option("--lr", adapt.lr, "online learning rate");
  adapt_cmd->add_option("--steps-per-update", adapt.steps_per_update,
                        "gradient steps per online sample");
  adapt_cmd->add_option("--max-grad-norm", adapt.max_grad_norm,
                        "per-update gradient norm clip (0 = off)");
  adapt_cmd->add_option("--v-step-scale", adapt.v_step_scale,
                        "descent basis scale for v [m]");
  adapt_cmd->add_flag("--reset-per-trajectory", adapt.reset_per_trajectory,
                      "reset theta_online at each trajectory start");
  adapt_cmd->add_option("--horizon", adapt.horizon, "prediction horizon");
  adapt_cmd->add_option("--label", adapt.label, "experiment label");

  pushpred::EvalOptions eval;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "evaluate a checkpoint, no adaptation");
  add_config_flag(eval_cmd);
  eval_cmd->add_option("--checkpoint", eval.checkpoint, "checkpoint")
      ->required();
  eval_cmd->add_option("--data", eval.data, "manifest, directory, or file")
      ->required();
  std::string eval_out;
  eval_cmd->add_option("--out", eval_out, "summary csv path");
  eval_cmd->add_option("--horizon", eval.horizon, "prediction horizon");
  eval_cmd->add_option("--label", eval.label, "experiment label");

  pushpred::PlotOptions plot;
  CLI::App* plot_cmd =
      app.add_subcommand("plot", "emit SVG loss plots from a loss csv");
  add_config_flag(plot_cmd);
  plot_cmd->add_option("--input", plot.input, "loss csv from adapt")
      ->required();
  plot_cmd->add_option("--out", plot.out_prefix, "output path prefix");
  double offline_loss = -1.0;
  CLI::Option* ol = plot_cmd->add_option(
      "--offline-loss", offline_loss,
      "draw a horizontal reference line at this loss");
  plot_cmd->add_option("--window", plot.window, "moving-average window");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) pushpred::cmd_simulate(sim);
    if (*train_cmd) pushpred::cmd_train(train);
    if (*adapt_cmd) pushpred::cmd_adapt(adapt);
    if (*eval_cmd) {
      if (!eval_out.empty()) eval.out = eval_out;
      pushpred::cmd_eval(eval);
    }
    if (*plot_cmd) {
      if (ol->count() > 0) plot.offline_loss = offline_loss;
      pushpred::cmd_plot(plot);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
