#pragma once

#include <vector>

#include "camcover/perception.hpp"
#include "camcover/world.hpp"

namespace camcover {

struct RewardWeights {
  double team_weight = 0.4;
  double lambda_vis = 0.8;
  double lambda_dir = 0.2;
  double lambda_pos = 0.2;
  double alpha_max = geometry::kPi / 4.0;
  double mu_max = 0.2;
  double mu_min = 0.0005;
  double d_max = 5000.0;

  void validate() const;
};

// Terms can be switched off individually for ablation runs; a disabled term
// contributes exactly zero wherever it appears.
struct AblationFlags {
  bool team = true;
  bool box = true;
  bool vis = true;
  bool dir = true;
  bool pos = true;
};

// Effective (post-ablation) values; `total` is always the weighted sum of
// `team` and `individual` as stored.
struct RewardBreakdown {
  double team = 0.0;
  double box = 0.0;
  double vis = 0.0;
  double dir = 0.0;
  double pos = 0.0;
  double individual = 0.0;
  double total = 0.0;
};

// Fraction of targets seen by at least one camera.
double team_reward(const VisibilityMatrix& v, int n_targets);

// min(100 * sum of box-area fractions, mu_max).
double box_reward(const std::vector<BoundingBox>& agent_boxes,
                  double frame_area, double mu_max);

// Each target the agent sees contributes 1 / (number of cameras seeing it),
// so duplicated coverage is shared rather than double counted.
double visibility_reward(const VisibilityMatrix& v, int agent);

// 1 - |yaw error to the mean seen-target position| / alpha_max; zero when the
// agent sees nothing (no direction is defined).
double direction_reward(double cam_x, double cam_y, double cam_yaw,
                        const std::vector<geometry::GroundPoint>& seen,
                        double alpha_max);

// Penalty in [-1, 0] for crowding: grows as the nearest other camera comes
// within d_max (Euclidean ground distance). Zero with a single camera.
double position_reward(const std::vector<geometry::GroundPoint>& camera_positions,
                       int agent, double d_max);

double total_reward(double team, double individual, double team_weight);

std::vector<RewardBreakdown> compute_rewards(const WorldState& state,
                                             const SenseResult& sensed,
                                             const RewardWeights& weights,
                                             const AblationFlags& flags);

}  // namespace camcover
