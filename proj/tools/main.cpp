#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "camcover/cli.hpp"
#include "camcover/config.hpp"

namespace {

struct ConfigArgs {
  std::string config_path;
  std::vector<std::string> sets;
  std::vector<std::string> ablate;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> outdir;
};

void add_config_options(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("--config", args.config_path,
                  "JSON config file (defaults apply when omitted)");
  cmd->add_option("--set", args.sets,
                  "Override a config key, e.g. --set env.n_cameras=4");
  cmd->add_option("--ablate", args.ablate,
                  "Disable a reward term: team, box, vis, dir, pos, "
                  "all-individual");
  cmd->add_option("--seed", args.seed, "Master seed");
  cmd->add_option("--outdir", args.outdir, "Artifact directory");
}

// Precedence: built-in defaults < config file < --set < dedicated flags.
camcover::RunConfig resolve_config(const ConfigArgs& args) {
  camcover::RunConfig cfg;
  if (!args.config_path.empty())
    cfg = camcover::load_run_config(args.config_path);
  for (const auto& assignment : args.sets)
    camcover::apply_override(cfg, assignment);
  for (const auto& name : args.ablate)
    camcover::apply_ablation_name(cfg.ablation, name);
  if (args.seed) cfg.seed = *args.seed;
  if (args.outdir) cfg.outdir = *args.outdir;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-camera coverage simulator and Q-learning trainer"};
  app.require_subcommand(1);

  auto* train = app.add_subcommand("train", "Train the camera control policy");
  ConfigArgs train_args;
  add_config_options(train, train_args);
  std::optional<std::int64_t> total_steps;
  std::optional<double> lr;
  std::optional<int> batch;
  train->add_option("--total-steps", total_steps, "Environment steps to train");
  train->add_option("--lr", lr, "Learning rate");
  train->add_option("--batch", batch, "Episodes per training batch");

  auto* eval = app.add_subcommand("eval", "Evaluate a policy by coverage rate");
  ConfigArgs eval_args;
  add_config_options(eval, eval_args);
  std::string checkpoint;
  bool baseline = false;
  int runs = 100;
  eval->add_option("--checkpoint", checkpoint, "Trained network checkpoint");
  eval->add_flag("--baseline", baseline, "Evaluate the fixed-camera baseline");
  eval->add_option("--runs", runs, "Number of evaluation episodes");

  auto* gradcheck = app.add_subcommand(
      "gradcheck", "Verify network gradients against finite differences");
  std::uint64_t gc_seed = 1;
  int gc_trials = 20;
  bool gc_fault = false;
  gradcheck->add_option("--seed", gc_seed, "Seed for random networks");
  gradcheck->add_option("--trials", gc_trials, "Number of random networks");
  gradcheck->add_flag("--inject-fault", gc_fault,
                      "Corrupt one analytic gradient (checker must fail)");

  auto* ipt = app.add_subcommand(
      "ipt-bench", "Benchmark pixel-to-ground coordinate estimation");
  ConfigArgs ipt_args;
  add_config_options(ipt, ipt_args);
  int ipt_steps = 1000;
  bool ipt_noise = false;
  ipt->add_option("--steps", ipt_steps, "Simulation steps to sample");
  ipt->add_flag("--noise", ipt_noise, "Enable the detector noise model");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      auto cfg = resolve_config(train_args);
      if (total_steps) cfg.trainer.total_steps = *total_steps;
      if (lr) cfg.trainer.lr = *lr;
      if (batch) cfg.trainer.batch_episodes = *batch;
      return camcover::cmd_train(cfg, std::cout, std::cerr);
    }
    if (eval->parsed()) {
      auto cfg = resolve_config(eval_args);
      return camcover::cmd_eval(checkpoint, baseline, cfg, runs, std::cout,
                                std::cerr);
    }
    if (gradcheck->parsed())
      return camcover::cmd_gradcheck(gc_seed, gc_trials, gc_fault, std::cout,
                                     std::cerr);
    if (ipt->parsed()) {
      auto cfg = resolve_config(ipt_args);
      if (ipt_noise) cfg.noise.enabled = true;
      return camcover::cmd_ipt_bench(cfg, ipt_steps, std::cout, std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
