#pragma once

#include <cstdint>
#include <vector>

#include "camcover/geometry.hpp"
#include "camcover/rng.hpp"

namespace camcover {

// Rectangular court centered on the world origin. Cameras ride the border,
// targets walk inside. Distances are world units (100 units = 1 m).
struct WorldConfig {
  double court_half_x = 5000.0;
  double court_half_y = 2500.0;
  int n_targets = 22;
  int n_cameras = 6;
  double camera_height = 500.0;
  int frame_width = 640;
  int frame_height = 480;
  double base_hfov = geometry::deg_to_rad(90.0);
  int episode_length = 100;
  double target_speed = 100.0;
  int destination_timeout = 15;
  double mu_min = 0.0005;  // box-area fraction needed to count as seen
  double mu_max = 0.2;
  double zoom_min = 0.5;
  double zoom_max = 2.0;
  double translation_step = 100.0;
  double rotation_step = geometry::deg_to_rad(10.0);
  double zoom_step = 0.1;  // multiplicative: *1.1 or /1.1
  double camera_pitch = geometry::deg_to_rad(-6.0);
  double target_half_width = 30.0;
  double target_half_depth = 20.0;
  double target_height = 180.0;
  int max_slots = 0;  // 0 -> n_targets

  double perimeter() const {
    return 4.0 * (court_half_x + court_half_y);
  }
  double frame_area() const {
    return static_cast<double>(frame_width) * frame_height;
  }
  int slots() const { return max_slots > 0 ? max_slots : n_targets; }

  void validate() const;  // throws std::invalid_argument
};

struct TargetState {
  geometry::GroundPoint position;
  geometry::GroundPoint destination;
  int steps_since_destination = 0;
};

// Camera location is a single arc-length coordinate along the court border,
// measured counterclockwise from the (-half_x, -half_y) corner.
struct CameraPose {
  double perimeter_s = 0.0;
  double yaw = 0.0;
  double zoom = 1.0;

  geometry::GroundPoint ground_position(const WorldConfig& cfg) const;
  geometry::Viewpoint viewpoint(const WorldConfig& cfg) const;
};

// One sub-action per control axis, each in {-1, 0, +1}.
struct Action {
  int move = 0;
  int rotate = 0;
  int zoom = 0;

  int index() const { return (move + 1) * 9 + (rotate + 1) * 3 + (zoom + 1); }
  static Action from_index(int idx);
  bool operator==(const Action&) const = default;
};

inline constexpr int kJointActionCount = 27;

// Pixel-space box, clipped to the frame.
struct BoundingBox {
  double u_min = 0.0;
  double v_min = 0.0;
  double u_max = 0.0;
  double v_max = 0.0;
  int target_id = -1;

  double width() const { return u_max - u_min; }
  double height() const { return v_max - v_min; }
  double area() const { return width() * height(); }
};

struct VisibilityMatrix {
  int n_cameras = 0;
  int n_targets = 0;
  std::vector<std::uint8_t> flags;

  VisibilityMatrix() = default;
  VisibilityMatrix(int cams, int targets)
      : n_cameras(cams), n_targets(targets),
        flags(static_cast<std::size_t>(cams) * targets, 0) {}

  std::uint8_t at(int cam, int target) const {
    return flags[static_cast<std::size_t>(cam) * n_targets + target];
  }
  void set(int cam, int target, bool seen) {
    flags[static_cast<std::size_t>(cam) * n_targets + target] = seen ? 1 : 0;
  }
};

struct WorldState {
  WorldConfig config;
  std::vector<TargetState> targets;
  std::vector<CameraPose> cameras;
  int step_index = 0;
  Rng rng{0};
};

geometry::GroundPoint perimeter_point(const WorldConfig& cfg, double s);

WorldState reset(const WorldConfig& cfg, std::uint64_t seed);

// Advances every camera by its action and every target by one walk step.
// Throws if the action count mismatches or the episode is already over.
WorldState step(const WorldState& state, const std::vector<Action>& joint);

CameraPose apply_action(const CameraPose& pose, const Action& action,
                        const WorldConfig& cfg);

TargetState advance_target(const TargetState& target, double speed,
                           int timeout, double court_half_x,
                           double court_half_y, Rng& rng);

geometry::CameraModel make_camera_model(const WorldConfig& cfg,
                                        const CameraPose& pose);

// Projects each target as an upright rectangular solid and takes the
// axis-aligned pixel bounds, clipped to the frame. Targets behind the camera
// or fully outside the frame are omitted.
std::vector<BoundingBox> synthesize_bboxes(const WorldState& state,
                                           int cam_index);

VisibilityMatrix visibility_from_boxes(
    const std::vector<std::vector<BoundingBox>>& boxes_per_camera,
    const WorldConfig& cfg);

VisibilityMatrix visibility_flags(const WorldState& state);

}  // namespace camcover
