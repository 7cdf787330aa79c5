#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "camcover/net.hpp"
#include "camcover/perception.hpp"
#include "camcover/world.hpp"

namespace camcover {

struct EvalReport {
  double mean = 0.0;
  double stddev = 0.0;  // population formula over runs
  std::vector<double> per_run;
  int n_runs = 0;
  std::uint64_t config_fingerprint = 0;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual void begin_episode() = 0;
  virtual std::vector<Action> act(
      const std::vector<Eigen::VectorXd>& encoded) = 0;
};

// The comparison baseline: cameras stay exactly where reset() put them,
// evenly spread along the border and aimed at the court center.
class FixedBaselinePolicy final : public Policy {
 public:
  explicit FixedBaselinePolicy(int n_cameras) : n_cameras_(n_cameras) {}
  void begin_episode() override {}
  std::vector<Action> act(const std::vector<Eigen::VectorXd>&) override {
    return std::vector<Action>(n_cameras_);
  }

 private:
  int n_cameras_;
};

// Greedy (epsilon = 0) action selection from a trained network, carrying one
// recurrent state per agent across the episode.
class GreedyNetPolicy final : public Policy {
 public:
  explicit GreedyNetPolicy(const net::NetworkParams& params);
  void begin_episode() override;
  std::vector<Action> act(const std::vector<Eigen::VectorXd>& encoded) override;

 private:
  const net::NetworkParams* params_;
  Eigen::MatrixXd hidden_;
};

// Mean over time of the per-step covered fraction. Throws on empty history.
double coverage_rate(const std::vector<VisibilityMatrix>& history);

// Full greedy episodes on distinct seeds (seed0 + run index).
EvalReport evaluate(Policy& policy, const WorldConfig& env,
                    const DetectorNoiseModel& noise, int n_runs,
                    std::uint64_t seed0);

struct IptReport {
  std::int64_t steps = 0;
  std::int64_t n_true_boxes = 0;
  std::int64_t n_estimates = 0;
  std::int64_t n_unclipped = 0;
  std::int64_t n_clipped = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double mean_unclipped = 0.0;
  double stddev_unclipped = 0.0;
  double mean_clipped = 0.0;
  double stddev_clipped = 0.0;
  double match_rate = 0.0;  // estimates / true boxes
};

// Measures the ground-coordinate estimation error against the simulator's
// true target positions over randomly driven episodes. Estimates are matched
// to targets by identity, and split by whether the source box touched the
// frame border.
IptReport ipt_benchmark(const WorldConfig& env, int n_steps,
                        const DetectorNoiseModel& noise, std::uint64_t seed);

}  // namespace camcover
