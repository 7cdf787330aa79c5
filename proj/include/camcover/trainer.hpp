#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>

#include "camcover/checkpoint.hpp"
#include "camcover/config.hpp"
#include "camcover/net.hpp"
#include "camcover/replay.hpp"
#include "camcover/reward.hpp"

namespace camcover {

// Q-values of one agent: [branch][action index], action index = sub-action+1.
using BranchQ =
    std::array<std::array<double, net::Topology::kActionsPerBranch>,
               net::Topology::kBranches>;

// Linear anneal from epsilon_start to epsilon_end, clamped afterwards.
double epsilon_at(std::int64_t step, const TrainerConfig& cfg);

// Per agent, per branch independently: explore uniformly with probability
// epsilon, otherwise take the branch argmax (ties -> lowest action index).
std::vector<Action> select_actions(const std::vector<BranchQ>& q_per_agent,
                                   double epsilon, Rng& rng);

// One-step double-Q target per branch: the online network picks the action,
// the target network values it. Time-limit truncation keeps bootstrapping.
std::array<double, net::Topology::kBranches> td_targets(
    double reward, double gamma, const BranchQ& online_next,
    const BranchQ& target_next);

bool target_sync_due(std::int64_t episode_count, int every);

net::Topology make_topology(const RunConfig& cfg);

// One squared-TD-error optimizer step of the online network over a batch of
// full episodes, recurrent state rolled forward from each episode start.
double train_on_episodes(net::NetworkParams& online,
                         const net::NetworkParams& target,
                         net::AdamState& adam,
                         const std::vector<const EpisodeRecord*>& batch,
                         const TrainerConfig& cfg);

struct EpisodeStats {
  int steps = 0;
  double coverage = 0.0;
  RewardBreakdown mean;  // averaged over steps and agents
};

class Trainer {
 public:
  explicit Trainer(const RunConfig& cfg);

  // Runs one epsilon-greedy episode and stores it in the replay buffer.
  EpisodeStats rollout_episode();

  // One optimizer step over a uniformly sampled batch of full episodes.
  // Returns the loss, or nothing while the buffer is still too small.
  std::optional<double> train_step();

  // Copies online -> target when the episode counter hits the sync period.
  bool maybe_sync_target();

  std::int64_t env_steps() const { return env_steps_; }
  std::int64_t episodes() const { return episodes_; }
  double current_epsilon() const;
  const net::NetworkParams& online() const { return online_; }
  const net::NetworkParams& target() const { return target_; }
  const ReplayBuffer& buffer() const { return buffer_; }

  TrainerStateSnapshot snapshot() const;

 private:
  RunConfig cfg_;
  net::Topology topo_;
  net::NetworkParams online_;
  net::NetworkParams target_;
  net::AdamState adam_;
  ReplayBuffer buffer_;
  Rng action_rng_;
  Rng noise_rng_;
  Rng sample_rng_;
  std::int64_t env_steps_ = 0;
  std::int64_t episodes_ = 0;
};

struct TrainSummary {
  std::int64_t episodes = 0;
  std::int64_t env_steps = 0;
  double final_epsilon = 0.0;
  double last_coverage = 0.0;
  std::string final_checkpoint;  // empty when nothing was persisted
};

// Full training loop. With a non-empty cfg.outdir writes config.echo,
// metrics.log (one JSON record per episode) and checkpoints/step-N.ckpt.
// `progress` gets occasional human-readable lines; pass nullptr to silence.
TrainSummary run_training(const RunConfig& cfg, std::ostream* progress);

}  // namespace camcover
