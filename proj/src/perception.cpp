#include "camcover/perception.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace camcover {

void DetectorNoiseModel::validate() const {
  if (miss_probability < 0.0 || miss_probability > 1.0)
    throw std::invalid_argument("miss probability must lie in [0, 1]");
  if (pixel_jitter_sigma < 0.0)
    throw std::invalid_argument("pixel jitter sigma must be non-negative");
}

std::vector<BoundingBox> detect(const std::vector<BoundingBox>& boxes,
                                const DetectorNoiseModel& noise, Rng& rng,
                                int frame_width, int frame_height) {
  if (!noise.enabled) return boxes;

  std::vector<BoundingBox> out;
  out.reserve(boxes.size());
  for (const auto& box : boxes) {
    if (rng.uniform() < noise.miss_probability) continue;

    BoundingBox b = box;
    if (noise.pixel_jitter_sigma > 0.0) {
      b.u_min += noise.pixel_jitter_sigma * rng.normal();
      b.u_max += noise.pixel_jitter_sigma * rng.normal();
      b.v_min += noise.pixel_jitter_sigma * rng.normal();
      b.v_max += noise.pixel_jitter_sigma * rng.normal();
      if (b.u_min > b.u_max) std::swap(b.u_min, b.u_max);
      if (b.v_min > b.v_max) std::swap(b.v_min, b.v_max);
    }
    b.u_min = std::clamp(b.u_min, 0.0, static_cast<double>(frame_width));
    b.u_max = std::clamp(b.u_max, 0.0, static_cast<double>(frame_width));
    b.v_min = std::clamp(b.v_min, 0.0, static_cast<double>(frame_height));
    b.v_max = std::clamp(b.v_max, 0.0, static_cast<double>(frame_height));
    if (b.u_min < b.u_max && b.v_min < b.v_max) out.push_back(b);
  }
  return out;
}

std::vector<Detection> estimate_coordinates(
    const std::vector<BoundingBox>& boxes, const geometry::CameraModel& cam) {
  std::vector<Detection> out;
  out.reserve(boxes.size());
  for (const auto& box : boxes) {
    const double u = 0.5 * (box.u_min + box.u_max);
    const auto gp = geometry::inverse_project_ground(cam, u, box.v_max);
    if (!gp) continue;
    out.push_back(Detection{box, *gp});
  }
  return out;
}

JointObservation build_joint_observation(
    const WorldState& state,
    const std::vector<std::vector<Detection>>& per_camera) {
  const auto& cfg = state.config;
  if (static_cast<int>(per_camera.size()) != cfg.n_cameras)
    throw std::invalid_argument("need one detection list per camera");

  std::vector<geometry::GroundPoint> positions(cfg.n_cameras);
  for (int i = 0; i < cfg.n_cameras; ++i)
    positions[i] = state.cameras[i].ground_position(cfg);

  JointObservation joint(cfg.n_cameras);
  for (int i = 0; i < cfg.n_cameras; ++i) {
    auto& obs = joint[i];
    obs.detections = per_camera[i];
    obs.x = positions[i].x;
    obs.y = positions[i].y;
    obs.yaw = state.cameras[i].yaw;
    obs.zoom = state.cameras[i].zoom;
    obs.l1_to_others.reserve(cfg.n_cameras - 1);
    for (int j = 0; j < cfg.n_cameras; ++j) {
      if (j == i) continue;
      obs.l1_to_others.push_back(std::abs(positions[i].x - positions[j].x) +
                                 std::abs(positions[i].y - positions[j].y));
    }
  }
  return joint;
}

SenseResult sense(const WorldState& state, const DetectorNoiseModel& noise,
                  Rng& rng) {
  const auto& cfg = state.config;
  SenseResult res;
  res.true_boxes.resize(cfg.n_cameras);
  res.true_detections.resize(cfg.n_cameras);
  res.observed.resize(cfg.n_cameras);

  for (int i = 0; i < cfg.n_cameras; ++i) {
    res.true_boxes[i] = synthesize_bboxes(state, i);
    const auto cam = make_camera_model(cfg, state.cameras[i]);
    res.true_detections[i] = estimate_coordinates(res.true_boxes[i], cam);
    if (noise.enabled) {
      const auto noisy = detect(res.true_boxes[i], noise, rng,
                                cfg.frame_width, cfg.frame_height);
      res.observed[i] = estimate_coordinates(noisy, cam);
    } else {
      res.observed[i] = res.true_detections[i];
    }
  }
  res.visibility = visibility_from_boxes(res.true_boxes, cfg);
  return res;
}

int encoded_feature_dim(const WorldConfig& cfg) {
  return 3 * cfg.slots() + 4 + (cfg.n_cameras - 1);
}

int encoded_extra_dim(const WorldConfig& cfg) { return cfg.n_cameras + 9; }

int encoded_total_dim(const WorldConfig& cfg) {
  return encoded_feature_dim(cfg) + encoded_extra_dim(cfg);
}

namespace {

double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

}  // namespace

Eigen::VectorXd encode(const JointObservation& joint, int agent_index,
                       const std::vector<Action>& last_actions,
                       const WorldConfig& cfg) {
  if (static_cast<int>(joint.size()) != cfg.n_cameras)
    throw std::invalid_argument("joint observation size mismatches config");
  if (agent_index < 0 || agent_index >= static_cast<int>(joint.size()))
    throw std::out_of_range("agent index out of range");

  const auto& obs = joint[agent_index];
  Eigen::VectorXd out = Eigen::VectorXd::Zero(encoded_total_dim(cfg));

  // Largest boxes first; ties broken by target id so the order is total.
  std::vector<const Detection*> ordered;
  ordered.reserve(obs.detections.size());
  for (const auto& d : obs.detections) ordered.push_back(&d);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const Detection* a, const Detection* b) {
                     if (a->box.area() != b->box.area())
                       return a->box.area() > b->box.area();
                     return a->box.target_id < b->box.target_id;
                   });

  int k = 0;
  const int slots = cfg.slots();
  for (const auto* d : ordered) {
    if (k >= slots) break;
    out[3 * k + 0] = clamp_unit(d->estimated.x / cfg.court_half_x);
    out[3 * k + 1] = clamp_unit(d->estimated.y / cfg.court_half_y);
    out[3 * k + 2] = 1.0;
    ++k;
  }

  int at = 3 * slots;
  out[at++] = clamp_unit(obs.x / cfg.court_half_x);
  out[at++] = clamp_unit(obs.y / cfg.court_half_y);
  out[at++] = geometry::wrap_angle(obs.yaw) / geometry::kPi;
  const double zoom_mid = 0.5 * (cfg.zoom_min + cfg.zoom_max);
  const double zoom_half = 0.5 * (cfg.zoom_max - cfg.zoom_min);
  out[at++] = zoom_half > 0.0 ? clamp_unit((obs.zoom - zoom_mid) / zoom_half)
                              : 0.0;
  const double half_perimeter = cfg.perimeter() / 2.0;
  for (double l1 : obs.l1_to_others)
    out[at++] = clamp_unit(l1 / half_perimeter);

  // Identity one-hot, then the previous action as three 3-way one-hots
  // (all zero on the first step of an episode).
  out[at + agent_index] = 1.0;
  at += static_cast<int>(joint.size());
  if (!last_actions.empty()) {
    if (last_actions.size() != joint.size())
      throw std::invalid_argument("need one previous action per camera");
    const Action& a = last_actions[agent_index];
    out[at + (a.move + 1)] = 1.0;
    out[at + 3 + (a.rotate + 1)] = 1.0;
    out[at + 6 + (a.zoom + 1)] = 1.0;
  }
  return out;
}

}  // namespace camcover
