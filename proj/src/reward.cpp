#include "camcover/reward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace camcover {

void RewardWeights::validate() const {
  if (team_weight < 0.0 || team_weight > 1.0)
    throw std::invalid_argument("team weight must lie in [0, 1]");
  if (lambda_vis < 0.0 || lambda_dir < 0.0 || lambda_pos < 0.0)
    throw std::invalid_argument("reward weights must be non-negative");
  if (!(alpha_max > 0.0) || alpha_max > geometry::kPi)
    throw std::invalid_argument("alpha_max must lie in (0, pi]");
  if (!(mu_min > 0.0) || !(mu_min < mu_max))
    throw std::invalid_argument("need 0 < mu_min < mu_max");
  if (d_max <= 0.0) throw std::invalid_argument("d_max must be positive");
}

double team_reward(const VisibilityMatrix& v, int n_targets) {
  if (n_targets <= 0) throw std::invalid_argument("need at least one target");
  if (v.n_targets != n_targets)
    throw std::invalid_argument("visibility matrix dimension mismatch");

  int covered = 0;
  for (int j = 0; j < n_targets; ++j) {
    for (int i = 0; i < v.n_cameras; ++i) {
      if (v.at(i, j)) {
        ++covered;
        break;
      }
    }
  }
  return static_cast<double>(covered) / n_targets;
}

double box_reward(const std::vector<BoundingBox>& agent_boxes,
                  double frame_area, double mu_max) {
  if (frame_area <= 0.0)
    throw std::invalid_argument("frame area must be positive");
  double fraction_sum = 0.0;
  for (const auto& box : agent_boxes) fraction_sum += box.area() / frame_area;
  return std::min(100.0 * fraction_sum, mu_max);
}

double visibility_reward(const VisibilityMatrix& v, int agent) {
  double sum = 0.0;
  for (int j = 0; j < v.n_targets; ++j) {
    if (!v.at(agent, j)) continue;
    int watchers = 0;
    for (int i = 0; i < v.n_cameras; ++i) watchers += v.at(i, j);
    sum += 1.0 / watchers;
  }
  return sum;
}

double direction_reward(double cam_x, double cam_y, double cam_yaw,
                        const std::vector<geometry::GroundPoint>& seen,
                        double alpha_max) {
  if (seen.empty()) return 0.0;

  geometry::GroundPoint mean{0.0, 0.0};
  for (const auto& p : seen) {
    mean.x += p.x;
    mean.y += p.y;
  }
  mean.x /= static_cast<double>(seen.size());
  mean.y /= static_cast<double>(seen.size());

  // Mean landing on the camera itself leaves the bearing undefined.
  if (std::hypot(mean.x - cam_x, mean.y - cam_y) < 1e-9) return 0.0;

  geometry::Viewpoint vp;
  vp.position = Eigen::Vector3d(cam_x, cam_y, 0.0);
  vp.yaw = cam_yaw;
  const double err = geometry::yaw_error(vp, mean);
  return 1.0 - std::abs(err) / alpha_max;
}

double position_reward(
    const std::vector<geometry::GroundPoint>& camera_positions, int agent,
    double d_max) {
  const int n = static_cast<int>(camera_positions.size());
  if (n < 2) return 0.0;

  double nearest = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) {
    if (j == agent) continue;
    const double d = std::hypot(camera_positions[agent].x - camera_positions[j].x,
                                camera_positions[agent].y - camera_positions[j].y);
    nearest = std::min(nearest, d);
  }
  return -std::max((d_max - nearest) / d_max, 0.0);
}

double total_reward(double team, double individual, double team_weight) {
  return team_weight * team + (1.0 - team_weight) * individual;
}

std::vector<RewardBreakdown> compute_rewards(const WorldState& state,
                                             const SenseResult& sensed,
                                             const RewardWeights& weights,
                                             const AblationFlags& flags) {
  const auto& cfg = state.config;
  const auto& v = sensed.visibility;
  const double frame_area = cfg.frame_area();

  std::vector<geometry::GroundPoint> positions(cfg.n_cameras);
  for (int i = 0; i < cfg.n_cameras; ++i)
    positions[i] = state.cameras[i].ground_position(cfg);

  const double team = flags.team ? team_reward(v, cfg.n_targets) : 0.0;

  std::vector<RewardBreakdown> out(cfg.n_cameras);
  for (int i = 0; i < cfg.n_cameras; ++i) {
    RewardBreakdown& r = out[i];
    r.team = team;
    if (flags.box)
      r.box = box_reward(sensed.true_boxes[i], frame_area, weights.mu_max);
    if (flags.vis) r.vis = visibility_reward(v, i);
    if (flags.dir) {
      std::vector<geometry::GroundPoint> seen;
      for (const auto& d : sensed.true_detections[i])
        if (v.at(i, d.box.target_id)) seen.push_back(d.estimated);
      r.dir = direction_reward(positions[i].x, positions[i].y,
                               state.cameras[i].yaw, seen, weights.alpha_max);
    }
    if (flags.pos) r.pos = position_reward(positions, i, weights.d_max);

    r.individual = r.box + weights.lambda_vis * r.vis +
                   weights.lambda_dir * r.dir + weights.lambda_pos * r.pos;
    r.total = total_reward(r.team, r.individual, weights.team_weight);
  }
  return out;
}

}  // namespace camcover
