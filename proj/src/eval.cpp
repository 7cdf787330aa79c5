#include "camcover/eval.hpp"

#include <cmath>
#include <stdexcept>

#include "camcover/reward.hpp"
#include "camcover/trainer.hpp"

namespace camcover {

GreedyNetPolicy::GreedyNetPolicy(const net::NetworkParams& params)
    : params_(&params) {
  begin_episode();
}

void GreedyNetPolicy::begin_episode() {
  hidden_ =
      Eigen::MatrixXd::Zero(params_->topo.hidden, params_->topo.n_agents);
}

std::vector<Action> GreedyNetPolicy::act(
    const std::vector<Eigen::VectorXd>& encoded) {
  const auto& topo = params_->topo;
  net::StepInput in;
  in.blocks.resize(topo.obs_dim, topo.n_agents);
  in.extras.resize(topo.extra_dim, topo.n_agents);
  for (int a = 0; a < topo.n_agents; ++a) {
    in.blocks.col(a) = encoded[a].head(topo.obs_dim);
    in.extras.col(a) = encoded[a].tail(topo.extra_dim);
  }
  const auto q = net::forward_step(*params_, in, hidden_);

  std::vector<BranchQ> per_agent(topo.n_agents);
  for (int a = 0; a < topo.n_agents; ++a)
    for (int b = 0; b < net::Topology::kBranches; ++b)
      for (int k = 0; k < net::Topology::kActionsPerBranch; ++k)
        per_agent[a][b][k] = q[b](k, a);

  Rng unused(0);  // epsilon = 0 never draws
  return select_actions(per_agent, 0.0, unused);
}

double coverage_rate(const std::vector<VisibilityMatrix>& history) {
  if (history.empty())
    throw std::invalid_argument("coverage needs a non-empty history");
  double acc = 0.0;
  for (const auto& v : history) acc += team_reward(v, v.n_targets);
  return acc / static_cast<double>(history.size());
}

namespace {

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;
};

MeanStd population_stats(const std::vector<double>& xs) {
  MeanStd out;
  if (xs.empty()) return out;
  for (double x : xs) out.mean += x;
  out.mean /= static_cast<double>(xs.size());
  double sq = 0.0;
  for (double x : xs) sq += (x - out.mean) * (x - out.mean);
  out.stddev = std::sqrt(sq / static_cast<double>(xs.size()));
  return out;
}

}  // namespace

EvalReport evaluate(Policy& policy, const WorldConfig& env,
                    const DetectorNoiseModel& noise, int n_runs,
                    std::uint64_t seed0) {
  if (n_runs < 1) throw std::invalid_argument("need at least one run");

  EvalReport report;
  report.n_runs = n_runs;
  report.per_run.reserve(n_runs);

  for (int run = 0; run < n_runs; ++run) {
    const std::uint64_t run_seed = seed0 + static_cast<std::uint64_t>(run);
    WorldState state = reset(env, run_seed);
    Rng noise_rng(split_seed(run_seed, 11));
    policy.begin_episode();

    std::vector<Action> last_actions;
    std::vector<VisibilityMatrix> history;
    history.reserve(env.episode_length);

    SenseResult sensed = sense(state, noise, noise_rng);
    for (int t = 0; t < env.episode_length; ++t) {
      const auto joint = build_joint_observation(state, sensed.observed);
      std::vector<Eigen::VectorXd> encoded;
      encoded.reserve(env.n_cameras);
      for (int a = 0; a < env.n_cameras; ++a)
        encoded.push_back(encode(joint, a, last_actions, env));

      const auto actions = policy.act(encoded);
      state = step(state, actions);
      sensed = sense(state, noise, noise_rng);
      history.push_back(sensed.visibility);
      last_actions = actions;
    }
    report.per_run.push_back(coverage_rate(history));
  }

  const MeanStd stats = population_stats(report.per_run);
  report.mean = stats.mean;
  report.stddev = stats.stddev;
  return report;
}

IptReport ipt_benchmark(const WorldConfig& env, int n_steps,
                        const DetectorNoiseModel& noise, std::uint64_t seed) {
  if (n_steps < 1) throw std::invalid_argument("need at least one step");

  IptReport report;
  std::vector<double> all, unclipped, clipped;

  Rng action_rng(split_seed(seed, 1));
  Rng noise_rng(split_seed(seed, 2));

  int episode = 0;
  while (report.steps < n_steps) {
    WorldState state =
        reset(env, split_seed(seed, 0x9000 + static_cast<std::uint64_t>(episode++)));
    for (int t = 0;
         t < env.episode_length && report.steps < n_steps; ++t) {
      std::vector<Action> actions(env.n_cameras);
      for (auto& a : actions)
        a = Action::from_index(action_rng.uniform_int(kJointActionCount));
      state = step(state, actions);
      ++report.steps;

      for (int i = 0; i < env.n_cameras; ++i) {
        const auto boxes = synthesize_bboxes(state, i);
        report.n_true_boxes += static_cast<std::int64_t>(boxes.size());
        const auto cam = make_camera_model(env, state.cameras[i]);
        const auto observable =
            noise.enabled ? detect(boxes, noise, noise_rng, env.frame_width,
                                   env.frame_height)
                          : boxes;
        for (const auto& det : estimate_coordinates(observable, cam)) {
          const auto& truth = state.targets[det.box.target_id].position;
          const double err = std::hypot(det.estimated.x - truth.x,
                                        det.estimated.y - truth.y);
          all.push_back(err);
          const bool touches_border =
              det.box.u_min <= 0.0 ||
              det.box.u_max >= static_cast<double>(env.frame_width) ||
              det.box.v_min <= 0.0 ||
              det.box.v_max >= static_cast<double>(env.frame_height);
          if (touches_border)
            clipped.push_back(err);
          else
            unclipped.push_back(err);
        }
      }
    }
  }

  report.n_estimates = static_cast<std::int64_t>(all.size());
  report.n_unclipped = static_cast<std::int64_t>(unclipped.size());
  report.n_clipped = static_cast<std::int64_t>(clipped.size());
  const auto s_all = population_stats(all);
  const auto s_un = population_stats(unclipped);
  const auto s_cl = population_stats(clipped);
  report.mean = s_all.mean;
  report.stddev = s_all.stddev;
  report.mean_unclipped = s_un.mean;
  report.stddev_unclipped = s_un.stddev;
  report.mean_clipped = s_cl.mean;
  report.stddev_clipped = s_cl.stddev;
  report.match_rate =
      report.n_true_boxes > 0
          ? static_cast<double>(report.n_estimates) / report.n_true_boxes
          : 0.0;
  return report;
}

}  // namespace camcover
