#include "camcover/world.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace camcover {

void WorldConfig::validate() const {
  if (court_half_x <= 0.0 || court_half_y <= 0.0)
    throw std::invalid_argument("court extents must be positive");
  if (n_targets < 1) throw std::invalid_argument("need at least one target");
  if (n_cameras < 1) throw std::invalid_argument("need at least one camera");
  if (camera_height <= 0.0)
    throw std::invalid_argument("camera height must be positive");
  if (frame_width <= 0 || frame_height <= 0)
    throw std::invalid_argument("frame dimensions must be positive");
  if (!(base_hfov > 0.0) || !(base_hfov < geometry::kPi))
    throw std::invalid_argument("horizontal fov must lie in (0, pi)");
  if (episode_length < 1)
    throw std::invalid_argument("episode length must be positive");
  if (target_speed < 0.0)
    throw std::invalid_argument("target speed must be non-negative");
  if (destination_timeout < 1)
    throw std::invalid_argument("destination timeout must be positive");
  if (!(mu_min > 0.0) || !(mu_min < mu_max))
    throw std::invalid_argument("need 0 < mu_min < mu_max");
  if (!(zoom_min > 0.0) || !(zoom_min <= zoom_max))
    throw std::invalid_argument("need 0 < zoom_min <= zoom_max");
  if (translation_step <= 0.0 || rotation_step <= 0.0 || zoom_step <= 0.0)
    throw std::invalid_argument("action step sizes must be positive");
  if (target_half_width <= 0.0 || target_half_depth <= 0.0 ||
      target_height <= 0.0)
    throw std::invalid_argument("target extents must be positive");
  if (max_slots < 0) throw std::invalid_argument("max_slots must be >= 0");
}

Action Action::from_index(int idx) {
  if (idx < 0 || idx >= kJointActionCount)
    throw std::out_of_range("action index out of range");
  return Action{idx / 9 - 1, (idx / 3) % 3 - 1, idx % 3 - 1};
}

geometry::GroundPoint perimeter_point(const WorldConfig& cfg, double s) {
  const double p = cfg.perimeter();
  s = std::fmod(s, p);
  if (s < 0.0) s += p;

  const double ex = 2.0 * cfg.court_half_x;  // bottom/top edge length
  const double ey = 2.0 * cfg.court_half_y;  // left/right edge length
  if (s < ex) return {-cfg.court_half_x + s, -cfg.court_half_y};
  s -= ex;
  if (s < ey) return {cfg.court_half_x, -cfg.court_half_y + s};
  s -= ey;
  if (s < ex) return {cfg.court_half_x - s, cfg.court_half_y};
  s -= ex;
  return {-cfg.court_half_x, cfg.court_half_y - s};
}

geometry::GroundPoint CameraPose::ground_position(const WorldConfig& cfg) const {
  return perimeter_point(cfg, perimeter_s);
}

geometry::Viewpoint CameraPose::viewpoint(const WorldConfig& cfg) const {
  const auto g = ground_position(cfg);
  geometry::Viewpoint vp;
  vp.position = Eigen::Vector3d(g.x, g.y, cfg.camera_height);
  vp.yaw = yaw;
  vp.pitch = cfg.camera_pitch;
  return vp;
}

WorldState reset(const WorldConfig& cfg, std::uint64_t seed) {
  cfg.validate();

  WorldState state;
  state.config = cfg;
  state.rng = Rng(seed);
  state.step_index = 0;

  state.targets.resize(cfg.n_targets);
  for (auto& t : state.targets) {
    t.position.x = state.rng.uniform(-cfg.court_half_x, cfg.court_half_x);
    t.position.y = state.rng.uniform(-cfg.court_half_y, cfg.court_half_y);
    t.destination.x = state.rng.uniform(-cfg.court_half_x, cfg.court_half_x);
    t.destination.y = state.rng.uniform(-cfg.court_half_y, cfg.court_half_y);
    t.steps_since_destination = 0;
  }

  // Evenly spaced along the border, offset half a gap from the corner,
  // looking at the court center.
  const double spacing = cfg.perimeter() / cfg.n_cameras;
  state.cameras.resize(cfg.n_cameras);
  for (int i = 0; i < cfg.n_cameras; ++i) {
    auto& cam = state.cameras[i];
    cam.perimeter_s = (i + 0.5) * spacing;
    const auto g = cam.ground_position(cfg);
    cam.yaw = geometry::wrap_angle(std::atan2(-g.y, -g.x));
    cam.zoom = 1.0;
  }
  return state;
}

CameraPose apply_action(const CameraPose& pose, const Action& action,
                        const WorldConfig& cfg) {
  CameraPose next = pose;
  const double p = cfg.perimeter();
  next.perimeter_s = std::fmod(pose.perimeter_s + action.move * cfg.translation_step, p);
  if (next.perimeter_s < 0.0) next.perimeter_s += p;

  next.yaw = geometry::wrap_angle(pose.yaw + action.rotate * cfg.rotation_step);

  if (action.zoom > 0)
    next.zoom = pose.zoom * (1.0 + cfg.zoom_step);
  else if (action.zoom < 0)
    next.zoom = pose.zoom / (1.0 + cfg.zoom_step);
  next.zoom = std::clamp(next.zoom, cfg.zoom_min, cfg.zoom_max);
  return next;
}

TargetState advance_target(const TargetState& target, double speed,
                           int timeout, double court_half_x,
                           double court_half_y, Rng& rng) {
  TargetState next = target;
  next.steps_since_destination = target.steps_since_destination + 1;

  const double dx = next.destination.x - next.position.x;
  const double dy = next.destination.y - next.position.y;
  const double dist = std::hypot(dx, dy);
  if (dist <= speed || dist == 0.0) {
    next.position = next.destination;
  } else {
    next.position.x += speed * dx / dist;
    next.position.y += speed * dy / dist;
  }

  const bool arrived = next.position.x == next.destination.x &&
                       next.position.y == next.destination.y;
  if (arrived || next.steps_since_destination > timeout) {
    next.destination.x = rng.uniform(-court_half_x, court_half_x);
    next.destination.y = rng.uniform(-court_half_y, court_half_y);
    next.steps_since_destination = 0;
  }
  return next;
}

WorldState step(const WorldState& state, const std::vector<Action>& joint) {
  if (static_cast<int>(joint.size()) != state.config.n_cameras)
    throw std::invalid_argument("need exactly one action per camera");
  if (state.step_index >= state.config.episode_length)
    throw std::logic_error("episode is already over; reset the world");

  WorldState next = state;
  for (int i = 0; i < next.config.n_cameras; ++i)
    next.cameras[i] = apply_action(state.cameras[i], joint[i], next.config);
  for (auto& t : next.targets)
    t = advance_target(t, next.config.target_speed,
                       next.config.destination_timeout,
                       next.config.court_half_x, next.config.court_half_y,
                       next.rng);
  next.step_index = state.step_index + 1;
  return next;
}

geometry::CameraModel make_camera_model(const WorldConfig& cfg,
                                        const CameraPose& pose) {
  return geometry::make_camera(pose.viewpoint(cfg), pose.zoom, cfg.frame_width,
                               cfg.frame_height, cfg.base_hfov);
}

std::vector<BoundingBox> synthesize_bboxes(const WorldState& state,
                                           int cam_index) {
  const auto& cfg = state.config;
  if (cam_index < 0 || cam_index >= cfg.n_cameras)
    throw std::out_of_range("camera index out of range");

  const auto cam = make_camera_model(cfg, state.cameras[cam_index]);
  std::vector<BoundingBox> boxes;
  boxes.reserve(state.targets.size());

  for (int j = 0; j < cfg.n_targets; ++j) {
    const auto& t = state.targets[j];
    double u_min = 0.0, u_max = 0.0, v_min = 0.0, v_max = 0.0;
    bool ok = true, first = true;
    for (int cx = -1; cx <= 1 && ok; cx += 2) {
      for (int cy = -1; cy <= 1 && ok; cy += 2) {
        for (int cz = 0; cz <= 1 && ok; ++cz) {
          const Eigen::Vector3d corner(
              t.position.x + cx * cfg.target_half_width,
              t.position.y + cy * cfg.target_half_depth,
              cz * cfg.target_height);
          const auto px = geometry::project(cam, corner);
          if (!px) {
            ok = false;
            break;
          }
          if (first) {
            u_min = u_max = px->u;
            v_min = v_max = px->v;
            first = false;
          } else {
            u_min = std::min(u_min, px->u);
            u_max = std::max(u_max, px->u);
            v_min = std::min(v_min, px->v);
            v_max = std::max(v_max, px->v);
          }
        }
      }
    }
    if (!ok) continue;  // some corner behind the camera

    BoundingBox box;
    box.u_min = std::clamp(u_min, 0.0, static_cast<double>(cfg.frame_width));
    box.u_max = std::clamp(u_max, 0.0, static_cast<double>(cfg.frame_width));
    box.v_min = std::clamp(v_min, 0.0, static_cast<double>(cfg.frame_height));
    box.v_max = std::clamp(v_max, 0.0, static_cast<double>(cfg.frame_height));
    box.target_id = j;
    if (box.u_min < box.u_max && box.v_min < box.v_max) boxes.push_back(box);
  }
  return boxes;
}

VisibilityMatrix visibility_from_boxes(
    const std::vector<std::vector<BoundingBox>>& boxes_per_camera,
    const WorldConfig& cfg) {
  VisibilityMatrix v(static_cast<int>(boxes_per_camera.size()), cfg.n_targets);
  const double frame_area = cfg.frame_area();
  for (int i = 0; i < v.n_cameras; ++i) {
    for (const auto& box : boxes_per_camera[i]) {
      if (box.area() / frame_area > cfg.mu_min) v.set(i, box.target_id, true);
    }
  }
  return v;
}

VisibilityMatrix visibility_flags(const WorldState& state) {
  std::vector<std::vector<BoundingBox>> boxes;
  boxes.reserve(state.config.n_cameras);
  for (int i = 0; i < state.config.n_cameras; ++i)
    boxes.push_back(synthesize_bboxes(state, i));
  return visibility_from_boxes(boxes, state.config);
}

}  // namespace camcover
