#include "camcover/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

#include "camcover/eval.hpp"
#include "camcover/perception.hpp"

namespace camcover {

using nlohmann::json;

double epsilon_at(std::int64_t step, const TrainerConfig& cfg) {
  if (step < 0) throw std::invalid_argument("step must be non-negative");
  if (step >= cfg.epsilon_anneal_steps) return cfg.epsilon_end;
  const double frac =
      static_cast<double>(step) / static_cast<double>(cfg.epsilon_anneal_steps);
  return cfg.epsilon_start + frac * (cfg.epsilon_end - cfg.epsilon_start);
}

namespace {

int argmax3(double a0, double a1, double a2) {
  int best = 0;
  double best_v = a0;
  if (a1 > best_v) {
    best = 1;
    best_v = a1;
  }
  if (a2 > best_v) best = 2;
  return best;
}

int branch_sub_action(const Action& a, int branch) {
  switch (branch) {
    case 0:
      return a.move;
    case 1:
      return a.rotate;
    default:
      return a.zoom;
  }
}

}  // namespace

std::vector<Action> select_actions(const std::vector<BranchQ>& q_per_agent,
                                   double epsilon, Rng& rng) {
  if (epsilon < 0.0 || epsilon > 1.0)
    throw std::invalid_argument("epsilon must lie in [0, 1]");

  std::vector<Action> actions(q_per_agent.size());
  for (std::size_t i = 0; i < q_per_agent.size(); ++i) {
    int sub[net::Topology::kBranches];
    for (int b = 0; b < net::Topology::kBranches; ++b) {
      const auto& q = q_per_agent[i][b];
      if (epsilon > 0.0 && rng.uniform() < epsilon)
        sub[b] = rng.uniform_int(3) - 1;
      else
        sub[b] = argmax3(q[0], q[1], q[2]) - 1;
    }
    actions[i] = Action{sub[0], sub[1], sub[2]};
  }
  return actions;
}

std::array<double, net::Topology::kBranches> td_targets(
    double reward, double gamma, const BranchQ& online_next,
    const BranchQ& target_next) {
  std::array<double, net::Topology::kBranches> out;
  for (int b = 0; b < net::Topology::kBranches; ++b) {
    const int astar =
        argmax3(online_next[b][0], online_next[b][1], online_next[b][2]);
    out[b] = reward + gamma * target_next[b][astar];
  }
  return out;
}

bool target_sync_due(std::int64_t episode_count, int every) {
  return episode_count % every == 0;
}

net::Topology make_topology(const RunConfig& cfg) {
  net::Topology topo;
  topo.n_agents = cfg.env.n_cameras;
  topo.obs_dim = encoded_feature_dim(cfg.env);
  topo.extra_dim = encoded_extra_dim(cfg.env);
  topo.enc1 = cfg.network.enc1;
  topo.enc2 = cfg.network.enc2;
  topo.trunk = cfg.network.trunk;
  topo.hidden = cfg.network.hidden;
  return topo;
}

namespace {

// Splits per-agent encoded vectors into the network's block/extra matrices.
net::StepInput pack_step(const std::vector<Eigen::VectorXd>& encoded,
                         const net::Topology& topo) {
  net::StepInput in;
  in.blocks.resize(topo.obs_dim, topo.n_agents);
  in.extras.resize(topo.extra_dim, topo.n_agents);
  for (int a = 0; a < topo.n_agents; ++a) {
    in.blocks.col(a) = encoded[a].head(topo.obs_dim);
    in.extras.col(a) = encoded[a].tail(topo.extra_dim);
  }
  return in;
}

std::vector<BranchQ> to_branch_q(const net::BranchOutput& q, int n_agents) {
  std::vector<BranchQ> out(n_agents);
  for (int a = 0; a < n_agents; ++a)
    for (int b = 0; b < net::Topology::kBranches; ++b)
      for (int k = 0; k < net::Topology::kActionsPerBranch; ++k)
        out[a][b][k] = q[b](k, a);
  return out;
}

std::vector<Eigen::VectorXd> encode_all(const WorldState& state,
                                        const SenseResult& sensed,
                                        const std::vector<Action>& last_actions) {
  const auto joint = build_joint_observation(state, sensed.observed);
  std::vector<Eigen::VectorXd> out;
  out.reserve(joint.size());
  for (int a = 0; a < static_cast<int>(joint.size()); ++a)
    out.push_back(encode(joint, a, last_actions, state.config));
  return out;
}

}  // namespace

Trainer::Trainer(const RunConfig& cfg)
    : cfg_(cfg),
      topo_(make_topology(cfg)),
      online_(net::init_params(topo_, split_seed(cfg.seed, 1))),
      target_(online_),  // initial alignment
      adam_(net::make_adam_state(online_)),
      buffer_(cfg.trainer.buffer_capacity),
      action_rng_(split_seed(cfg.seed, 2)),
      noise_rng_(split_seed(cfg.seed, 3)),
      sample_rng_(split_seed(cfg.seed, 4)) {
  cfg_.validate();
}

double Trainer::current_epsilon() const {
  return epsilon_at(env_steps_, cfg_.trainer);
}

EpisodeStats Trainer::rollout_episode() {
  const int n = topo_.n_agents;
  const int length = cfg_.env.episode_length;

  WorldState state =
      reset(cfg_.env, split_seed(cfg_.seed, 0x100000 + episodes_));
  Eigen::MatrixXd hidden = Eigen::MatrixXd::Zero(topo_.hidden, n);
  std::vector<Action> last_actions;  // empty -> zero one-hots at t = 0

  EpisodeRecord rec;
  rec.obs.reserve(length + 1);
  rec.actions.reserve(length);
  rec.rewards.reserve(length);
  rec.truncated.reserve(length);

  SenseResult sensed = sense(state, cfg_.noise, noise_rng_);
  rec.obs.push_back(encode_all(state, sensed, last_actions));

  EpisodeStats stats;
  stats.steps = length;
  double coverage_sum = 0.0;

  for (int t = 0; t < length; ++t) {
    const auto q =
        net::forward_step(online_, pack_step(rec.obs.back(), topo_), hidden);
    const double eps = epsilon_at(env_steps_, cfg_.trainer);
    const auto actions = select_actions(to_branch_q(q, n), eps, action_rng_);

    state = step(state, actions);
    sensed = sense(state, cfg_.noise, noise_rng_);
    const auto rewards =
        compute_rewards(state, sensed, cfg_.reward, cfg_.ablation);

    std::vector<double> totals(n);
    for (int i = 0; i < n; ++i) {
      totals[i] = rewards[i].total;
      stats.mean.team += rewards[i].team;
      stats.mean.box += rewards[i].box;
      stats.mean.vis += rewards[i].vis;
      stats.mean.dir += rewards[i].dir;
      stats.mean.pos += rewards[i].pos;
      stats.mean.individual += rewards[i].individual;
      stats.mean.total += rewards[i].total;
    }
    coverage_sum += team_reward(sensed.visibility, cfg_.env.n_targets);

    rec.actions.push_back(actions);
    rec.rewards.push_back(std::move(totals));
    rec.truncated.push_back(t == length - 1 ? 1 : 0);
    last_actions = actions;
    rec.obs.push_back(encode_all(state, sensed, last_actions));
    ++env_steps_;
  }

  buffer_.add(std::move(rec));
  ++episodes_;

  const double scale = 1.0 / (static_cast<double>(length) * n);
  stats.mean.team *= scale;
  stats.mean.box *= scale;
  stats.mean.vis *= scale;
  stats.mean.dir *= scale;
  stats.mean.pos *= scale;
  stats.mean.individual *= scale;
  stats.mean.total *= scale;
  stats.coverage = coverage_sum / length;
  return stats;
}

double train_on_episodes(net::NetworkParams& online,
                         const net::NetworkParams& target,
                         net::AdamState& adam,
                         const std::vector<const EpisodeRecord*>& batch,
                         const TrainerConfig& cfg) {
  if (batch.empty()) throw std::invalid_argument("empty training batch");
  const net::Topology& topo = online.topo;
  const int n = topo.n_agents;
  const int length = batch[0]->length();
  for (const auto* ep : batch)
    if (ep->length() != length || ep->n_agents() != n)
      throw std::logic_error("episodes in one batch must share their shape");

  const Eigen::Index cols = static_cast<Eigen::Index>(batch.size()) * n;

  // Steps 0..length-1 carry the loss; step `length` exists only to provide
  // the bootstrap values of the final transition.
  std::vector<net::StepInput> seq(length + 1);
  for (int t = 0; t <= length; ++t) {
    seq[t].blocks.resize(topo.obs_dim, cols);
    seq[t].extras.resize(topo.extra_dim, cols);
    for (std::size_t e = 0; e < batch.size(); ++e) {
      const auto& ep = *batch[e];
      for (int a = 0; a < n; ++a) {
        const Eigen::Index col = static_cast<Eigen::Index>(e) * n + a;
        seq[t].blocks.col(col) = ep.obs[t][a].head(topo.obs_dim);
        seq[t].extras.col(col) = ep.obs[t][a].tail(topo.extra_dim);
      }
    }
  }

  const Eigen::MatrixXd hidden0 = Eigen::MatrixXd::Zero(topo.hidden, cols);
  const auto online_fwd = net::forward_sequence(online, seq, hidden0, true);
  const auto target_fwd = net::forward_sequence(target, seq, hidden0, false);

  std::vector<net::BranchOutput> dq(seq.size());
  for (auto& step_dq : dq)
    for (int b = 0; b < net::Topology::kBranches; ++b)
      step_dq[b] = Eigen::MatrixXd::Zero(net::Topology::kActionsPerBranch, cols);

  const double count = static_cast<double>(batch.size()) * length * n *
                       net::Topology::kBranches;
  double loss = 0.0;
  for (int t = 0; t < length; ++t) {
    for (std::size_t e = 0; e < batch.size(); ++e) {
      const auto& ep = *batch[e];
      for (int i = 0; i < n; ++i) {
        const Eigen::Index col = static_cast<Eigen::Index>(e) * n + i;
        const double reward = ep.rewards[t][i];
        // Episodes only end by the clock; by default that truncation keeps
        // bootstrapping, but episodic runs can cut the value off instead.
        const double boot =
            (ep.truncated[t] != 0 && !cfg.bootstrap_truncated) ? 0.0 : 1.0;
        for (int b = 0; b < net::Topology::kBranches; ++b) {
          const auto& next_online = online_fwd.q[t + 1][b];
          const int astar = argmax3(next_online(0, col), next_online(1, col),
                                    next_online(2, col));
          const double td_target =
              reward +
              boot * cfg.gamma * target_fwd.q[t + 1][b](astar, col);
          const int chosen = branch_sub_action(ep.actions[t][i], b) + 1;
          const double td = online_fwd.q[t][b](chosen, col) - td_target;
          loss += td * td;
          dq[t][b](chosen, col) = 2.0 * td / count;
        }
      }
    }
  }
  loss /= count;

  net::NetworkParams grads =
      net::backward_sequence(online, seq, hidden0, online_fwd, dq);
  const double norm = net::global_norm(grads);
  if (norm > cfg.grad_clip) net::scale_params(grads, cfg.grad_clip / norm);
  net::adam_step(online, grads, adam, cfg.lr);
  return loss;
}

std::optional<double> Trainer::train_step() {
  const std::size_t batch =
      static_cast<std::size_t>(cfg_.trainer.batch_episodes);
  if (buffer_.size() < batch) return std::nullopt;

  const auto idx = buffer_.sample_indices(batch, sample_rng_);
  std::vector<const EpisodeRecord*> episodes;
  episodes.reserve(idx.size());
  for (const auto i : idx) episodes.push_back(&buffer_.at(i));

  TrainerConfig cfg = cfg_.trainer;
  if (cfg.lr_end > 0.0) {
    const double frac = std::min(
        1.0, static_cast<double>(env_steps_) / cfg.total_steps);
    cfg.lr = cfg.lr + frac * (cfg.lr_end - cfg.lr);
  }
  return train_on_episodes(online_, target_, adam_, episodes, cfg);
}

bool Trainer::maybe_sync_target() {
  if (!target_sync_due(episodes_, cfg_.trainer.target_sync_episodes))
    return false;
  target_ = online_;
  return true;
}

TrainerStateSnapshot Trainer::snapshot() const {
  TrainerStateSnapshot st;
  st.env_steps = env_steps_;
  st.episodes = episodes_;
  st.epsilon = current_epsilon();
  st.adam = adam_;
  st.target = target_;
  return st;
}

namespace {

json reward_means_json(const RewardBreakdown& r) {
  return json{{"team", r.team},     {"box", r.box},
              {"vis", r.vis},       {"dir", r.dir},
              {"pos", r.pos},       {"individual", r.individual},
              {"total", r.total}};
}

}  // namespace

TrainSummary run_training(const RunConfig& cfg, std::ostream* progress) {
  cfg.validate();
  namespace fs = std::filesystem;

  const bool persist = !cfg.outdir.empty();
  std::ofstream metrics;
  if (persist) {
    fs::create_directories(fs::path(cfg.outdir) / "checkpoints");
    std::ofstream echo(fs::path(cfg.outdir) / "config.echo");
    echo << run_config_to_json_text(cfg);
    if (!echo) throw std::runtime_error("cannot write into " + cfg.outdir);
    metrics.open(fs::path(cfg.outdir) / "metrics.log",
                 std::ios::out | std::ios::trunc);
    if (!metrics) throw std::runtime_error("cannot write into " + cfg.outdir);
  }

  Trainer trainer(cfg);
  const json ablate = json::parse(ablation_names(cfg.ablation));
  const auto t_begin = std::chrono::steady_clock::now();

  TrainSummary summary;
  while (trainer.env_steps() < cfg.trainer.total_steps) {
    const EpisodeStats stats = trainer.rollout_episode();
    std::optional<double> loss;
    if (trainer.episodes() % cfg.trainer.train_every_episodes == 0)
      for (int u = 0; u < cfg.trainer.updates_per_train; ++u)
        loss = trainer.train_step();
    trainer.maybe_sync_target();

    summary.last_coverage = stats.coverage;
    const bool done = trainer.env_steps() >= cfg.trainer.total_steps;

    if (persist) {
      json line;
      line["type"] = "train";
      line["episode"] = trainer.episodes();
      line["env_steps"] = trainer.env_steps();
      line["epsilon"] = trainer.current_epsilon();
      if (loss)
        line["loss"] = *loss;
      else
        line["loss"] = nullptr;
      line["coverage"] = stats.coverage;
      line["reward_mean"] = reward_means_json(stats.mean);
      line["ablate"] = ablate;
      metrics << line.dump() << "\n";
    }

    if (cfg.trainer.eval_every_episodes > 0 &&
        trainer.episodes() % cfg.trainer.eval_every_episodes == 0) {
      GreedyNetPolicy policy(trainer.online());
      const EvalReport report =
          evaluate(policy, cfg.env, cfg.noise, cfg.trainer.eval_episodes,
                   split_seed(cfg.seed, 0x200000 + trainer.episodes()));
      if (persist) {
        json line;
        line["type"] = "eval";
        line["episode"] = trainer.episodes();
        line["env_steps"] = trainer.env_steps();
        line["coverage_mean"] = report.mean;
        line["coverage_std"] = report.stddev;
        line["runs"] = report.n_runs;
        metrics << line.dump() << "\n";
      }
      if (progress)
        *progress << "eval @" << trainer.env_steps()
                  << " steps: coverage " << report.mean << " +- "
                  << report.stddev << "\n";
    }

    if (persist &&
        (done ||
         trainer.episodes() % cfg.trainer.checkpoint_every_episodes == 0)) {
      const auto snap = trainer.snapshot();
      const std::string path =
          (fs::path(cfg.outdir) / "checkpoints" /
           ("step-" + std::to_string(trainer.env_steps()) + ".ckpt"))
              .string();
      save_checkpoint(path, trainer.online(), &snap);
      summary.final_checkpoint = path;
    }

    if (progress && (done || trainer.episodes() % 25 == 0)) {
      const double elapsed =
          std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                        t_begin)
              .count();
      *progress << "episode " << trainer.episodes() << " steps "
                << trainer.env_steps() << " eps " << trainer.current_epsilon()
                << " coverage " << stats.coverage << " loss "
                << (loss ? std::to_string(*loss) : std::string("n/a"))
                << " elapsed " << elapsed << "s\n";
    }
  }

  summary.episodes = trainer.episodes();
  summary.env_steps = trainer.env_steps();
  summary.final_epsilon = trainer.current_epsilon();
  return summary;
}

}  // namespace camcover
