#include <doctest.h>

#include <cmath>

#include "camcover/trainer.hpp"

using namespace camcover;

namespace {

RunConfig tiny_run_config() {
  RunConfig cfg;
  cfg.seed = 5;
  cfg.outdir.clear();
  cfg.env.n_cameras = 2;
  cfg.env.n_targets = 3;
  cfg.env.episode_length = 6;
  cfg.network = {8, 8, 12, 8};
  cfg.trainer.total_steps = 60;
  cfg.trainer.batch_episodes = 3;
  cfg.trainer.buffer_capacity = 16;
  cfg.trainer.eval_every_episodes = 0;
  return cfg;
}

}  // namespace

TEST_CASE("epsilon anneals linearly and then stays put") {
  TrainerConfig cfg;
  CHECK(epsilon_at(0, cfg) == 1.0);
  CHECK(epsilon_at(50000, cfg) == doctest::Approx(0.1));
  CHECK(epsilon_at(25000, cfg) == doctest::Approx(0.55));
  CHECK(epsilon_at(500000, cfg) == doctest::Approx(0.1));
  CHECK_THROWS_AS(epsilon_at(-1, cfg), std::invalid_argument);

  double prev = 2.0;
  for (std::int64_t s = 0; s < 60000; s += 500) {
    const double e = epsilon_at(s, cfg);
    CHECK(e <= prev);
    prev = e;
  }
}

TEST_CASE("greedy selection takes the branch argmax, ties to the left") {
  BranchQ q;
  q[0] = {0.1, 0.9, 0.3};   // argmax 1 -> move 0
  q[1] = {0.5, 0.5, 0.1};   // tie -> index 0 -> rotate -1
  q[2] = {0.0, 0.0, 1.0};   // argmax 2 -> zoom +1
  Rng rng(1);
  const auto actions = select_actions({q}, 0.0, rng);
  REQUIRE(actions.size() == 1);
  CHECK(actions[0].move == 0);
  CHECK(actions[0].rotate == -1);
  CHECK(actions[0].zoom == 1);
  CHECK(rng == Rng(1));  // no draws at epsilon 0
}

TEST_CASE("full exploration is uniform over the 27 joint actions") {
  BranchQ q{};  // all zero; selection must come from the dice
  Rng rng(1234);
  std::array<int, kJointActionCount> counts{};
  const int draws = 10000;
  for (int i = 0; i < draws; ++i)
    counts[select_actions({q}, 1.0, rng)[0].index()]++;

  const double expected = static_cast<double>(draws) / kJointActionCount;
  double chi2 = 0.0;
  for (const int c : counts)
    chi2 += (c - expected) * (c - expected) / expected;
  CHECK(chi2 < 54.05);  // chi-square critical value, 26 dof, p = 0.999
}

TEST_CASE("double-Q targets pick with the online net, value with the target") {
  BranchQ online{};
  BranchQ target{};
  online[0] = {0.0, 3.0, 1.0};  // argmax index 1
  target[0] = {-5.0, 2.0, 9.0};
  online[1] = {1.0, 0.0, 0.0};
  target[1] = {4.0, 0.0, 0.0};
  online[2] = {0.0, 0.0, 2.0};
  target[2] = {0.0, 0.0, -1.0};

  const auto y = td_targets(1.0, 0.99, online, target);
  CHECK(y[0] == doctest::Approx(1.0 + 0.99 * 2.0));
  CHECK(y[1] == doctest::Approx(1.0 + 0.99 * 4.0));
  CHECK(y[2] == doctest::Approx(1.0 + 0.99 * -1.0));

  const auto no_bootstrap = td_targets(1.0, 0.0, online, target);
  for (const double v : no_bootstrap) CHECK(v == 1.0);

  // identical networks reduce to the plain max target
  const auto same = td_targets(0.5, 0.9, target, target);
  CHECK(same[0] == doctest::Approx(0.5 + 0.9 * 9.0));
}

TEST_CASE("target sync cadence") {
  CHECK(target_sync_due(0, 100));
  CHECK(target_sync_due(100, 100));
  CHECK_FALSE(target_sync_due(101, 100));
  CHECK_FALSE(target_sync_due(99, 100));
  CHECK(target_sync_due(200, 100));
}

TEST_CASE("replay buffer evicts the oldest episode first") {
  ReplayBuffer buf(3);
  for (int k = 0; k < 4; ++k) {
    EpisodeRecord ep;
    ep.obs = {{Eigen::VectorXd::Zero(2)}, {Eigen::VectorXd::Zero(2)}};
    ep.actions = {{Action{}}};
    ep.rewards = {{static_cast<double>(k)}};
    ep.truncated = {1};
    buf.add(std::move(ep));
  }
  CHECK(buf.size() == 3);
  CHECK(buf.at(0).rewards[0][0] == 1.0);  // episode 0 evicted
  CHECK(buf.at(2).rewards[0][0] == 3.0);
}

TEST_CASE("sampling is uniform without replacement") {
  ReplayBuffer buf(8);
  for (int k = 0; k < 8; ++k) {
    EpisodeRecord ep;
    ep.obs = {{Eigen::VectorXd::Zero(2)}, {Eigen::VectorXd::Zero(2)}};
    ep.actions = {{Action{}}};
    ep.rewards = {{0.0}};
    ep.truncated = {1};
    buf.add(std::move(ep));
  }
  Rng rng(3);
  const auto idx = buf.sample_indices(8, rng);
  std::vector<bool> seen(8, false);
  for (const auto i : idx) {
    CHECK_FALSE(seen[i]);
    seen[i] = true;
  }
  CHECK_THROWS_AS(buf.sample_indices(9, rng), std::invalid_argument);
}

namespace {

// A one-transition episode compatible with a 1-agent topology.
EpisodeRecord one_step_episode(const net::Topology& topo, double reward) {
  EpisodeRecord ep;
  const int dim = topo.obs_dim + topo.extra_dim;
  ep.obs = {{Eigen::VectorXd::Constant(dim, 0.2)},
            {Eigen::VectorXd::Constant(dim, -0.1)}};
  ep.actions = {{Action{0, 0, 0}}};
  ep.rewards = {{reward}};
  ep.truncated = {1};
  return ep;
}

}  // namespace

TEST_CASE("the batch loss equals the hand-computed squared TD error") {
  net::Topology topo;
  topo.n_agents = 1;
  topo.obs_dim = 4;
  topo.extra_dim = 10;
  topo.enc1 = topo.enc2 = 4;
  topo.trunk = 5;
  topo.hidden = 4;

  // All-zero networks output Q = 0 everywhere, so with a single transition
  // the per-branch target is exactly the reward.
  auto online = net::zeros_like(net::init_params(topo, 1));
  const auto target = online;
  auto adam = net::make_adam_state(online);
  TrainerConfig cfg;

  const auto ep = one_step_episode(topo, 0.7);
  const double loss = train_on_episodes(online, target, adam, {&ep}, cfg);
  CHECK(loss == doctest::Approx(0.7 * 0.7).epsilon(1e-12));

  // targets equal to the current Q-values: zero loss, parameters untouched
  auto untouched = net::zeros_like(net::init_params(topo, 1));
  auto adam2 = net::make_adam_state(untouched);
  const auto quiet = one_step_episode(topo, 0.0);
  const double zero_loss =
      train_on_episodes(untouched, target, adam2, {&quiet}, cfg);
  CHECK(zero_loss == 0.0);
  CHECK(net::global_norm(untouched) == 0.0);
}

TEST_CASE("truncated transitions bootstrap only when configured to") {
  net::Topology topo;
  topo.n_agents = 1;
  topo.obs_dim = 4;
  topo.extra_dim = 10;
  topo.enc1 = topo.enc2 = 4;
  topo.trunk = 5;
  topo.hidden = 4;

  // Zero weights with a unit head bias make the target net output exactly 1
  // for every action while the online net still outputs 0.
  auto target = net::zeros_like(net::init_params(topo, 1));
  for (int b = 0; b < net::Topology::kBranches; ++b)
    target.head_b[b].setOnes();

  const auto ep = one_step_episode(topo, 0.7);
  TrainerConfig cfg;

  auto online = net::zeros_like(net::init_params(topo, 1));
  auto adam = net::make_adam_state(online);
  const double with_bootstrap =
      train_on_episodes(online, target, adam, {&ep}, cfg);
  const double y = 0.7 + cfg.gamma * 1.0;
  CHECK(with_bootstrap == doctest::Approx(y * y).epsilon(1e-12));

  cfg.bootstrap_truncated = false;
  auto episodic = net::zeros_like(net::init_params(topo, 1));
  auto adam2 = net::make_adam_state(episodic);
  const double without =
      train_on_episodes(episodic, target, adam2, {&ep}, cfg);
  CHECK(without == doctest::Approx(0.7 * 0.7).epsilon(1e-12));
}

TEST_CASE("training loss is deterministic in the seed") {
  auto cfg = tiny_run_config();
  cfg.trainer.batch_episodes = 2;

  auto run_once = [&cfg]() {
    Trainer tr(cfg);
    tr.rollout_episode();
    tr.rollout_episode();
    const auto loss = tr.train_step();
    REQUIRE(loss.has_value());
    return *loss;
  };
  CHECK(run_once() == run_once());
}

TEST_CASE("train_step declines until the buffer holds a batch") {
  const auto cfg = tiny_run_config();
  Trainer tr(cfg);
  CHECK_FALSE(tr.train_step().has_value());
  tr.rollout_episode();
  tr.rollout_episode();
  CHECK_FALSE(tr.train_step().has_value());
  tr.rollout_episode();
  CHECK(tr.train_step().has_value());
  CHECK(tr.buffer().size() == 3);
}

TEST_CASE("rollouts are reproducible across trainer instances") {
  const auto cfg = tiny_run_config();
  Trainer a(cfg);
  Trainer b(cfg);
  const auto sa = a.rollout_episode();
  const auto sb = b.rollout_episode();
  CHECK(sa.coverage == sb.coverage);
  CHECK(sa.mean.total == sb.mean.total);
  const auto& ea = a.buffer().at(0);
  const auto& eb = b.buffer().at(0);
  REQUIRE(ea.length() == eb.length());
  for (int t = 0; t < ea.length(); ++t) {
    CHECK(ea.rewards[t] == eb.rewards[t]);
    CHECK(ea.actions[t][0] == eb.actions[t][0]);
  }
}

TEST_CASE("the target network follows on sync and only then") {
  const auto cfg = tiny_run_config();
  Trainer tr(cfg);
  // initial alignment
  {
    const auto ov = net::tensor_views(tr.online());
    const auto tv = net::tensor_views(tr.target());
    for (std::size_t k = 0; k < ov.size(); ++k)
      CHECK((ov[k] - tv[k]).norm() == 0.0);
  }
  for (int e = 0; e < 3; ++e) tr.rollout_episode();
  tr.train_step();  // online moves away from target
  const auto before = net::tensor_views(tr.target());
  bool online_differs = false;
  const auto ov = net::tensor_views(tr.online());
  for (std::size_t k = 0; k < ov.size(); ++k)
    online_differs |= (ov[k] - before[k]).norm() > 0.0;
  CHECK(online_differs);

  CHECK_FALSE(tr.maybe_sync_target());  // 3 episodes, period 100
}

TEST_CASE("run_training finishes the requested number of steps") {
  auto cfg = tiny_run_config();
  const auto summary = run_training(cfg, nullptr);
  CHECK(summary.env_steps == cfg.trainer.total_steps);
  CHECK(summary.episodes ==
        cfg.trainer.total_steps / cfg.env.episode_length);
  CHECK(summary.final_checkpoint.empty());

  const auto again = run_training(cfg, nullptr);
  CHECK(again.last_coverage == summary.last_coverage);
}
