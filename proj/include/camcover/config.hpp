#pragma once

#include <cstdint>
#include <string>

#include "camcover/perception.hpp"
#include "camcover/reward.hpp"
#include "camcover/world.hpp"

namespace camcover {

struct NetworkSizes {
  int enc1 = 64;
  int enc2 = 64;
  int trunk = 128;
  int hidden = 128;
};

struct TrainerConfig {
  double gamma = 0.99;
  double lr = 0.0005;
  double lr_end = 0.0;  // > 0: decay the rate linearly to this over the run
  int batch_episodes = 32;
  double epsilon_start = 1.0;
  double epsilon_end = 0.1;
  std::int64_t epsilon_anneal_steps = 50000;
  int target_sync_episodes = 100;
  std::int64_t total_steps = 500000;
  std::size_t buffer_capacity = 2000;
  double grad_clip = 10.0;
  bool bootstrap_truncated = true;  // clock-cut episodes keep bootstrapping
  int train_every_episodes = 1;
  int updates_per_train = 1;
  int checkpoint_every_episodes = 1000;
  int eval_every_episodes = 250;  // 0 disables in-training evaluation
  int eval_episodes = 3;

  void validate() const;
};

struct RunConfig {
  std::uint64_t seed = 1;
  std::string outdir = "runs/default";
  WorldConfig env;
  DetectorNoiseModel noise;
  RewardWeights reward;
  AblationFlags ablation;
  NetworkSizes network;
  TrainerConfig trainer;

  void validate() const;
};

RunConfig load_run_config(const std::string& path);
RunConfig run_config_from_json_text(const std::string& text);
std::string run_config_to_json_text(const RunConfig& cfg);

// Applies `--set key=value` style overrides with dotted paths, e.g.
// "env.n_cameras=4" or "reward.ablate=[\"team\"]".
void apply_override(RunConfig& cfg, const std::string& assignment);

// Stable digest of the effective configuration (FNV-1a over the canonical
// JSON text).
std::uint64_t config_fingerprint(const RunConfig& cfg);

// Names accepted by the ablation switch: team, box, vis, dir, pos,
// all-individual.
void apply_ablation_name(AblationFlags& flags, const std::string& name);
std::string ablation_names(const AblationFlags& flags);  // JSON array text

}  // namespace camcover
