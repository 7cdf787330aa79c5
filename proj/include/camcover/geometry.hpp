#pragma once

#include <Eigen/Dense>
#include <optional>

namespace camcover::geometry {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

struct Intrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double u0 = 0.0;
  double v0 = 0.0;

  Eigen::Matrix3d matrix() const;
};

// World -> camera rigid transform: p_cam = rotation * p_world + translation.
struct Extrinsics {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
};

// Camera placement: position in world units, yaw about +z measured from the
// +x axis, pitch above the horizontal (negative looks down).
struct Viewpoint {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double yaw = 0.0;
  double pitch = 0.0;
};

// Point on the ground plane z = 0.
struct GroundPoint {
  double x = 0.0;
  double y = 0.0;
};

// Image point with its camera-frame depth in world units. v grows downward,
// origin at the top-left of the frame.
struct PixelPoint {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
};

struct CameraModel {
  Intrinsics intrinsics;
  Extrinsics extrinsics;
  int frame_width = 0;
  int frame_height = 0;
};

// Focal length follows the horizontal field of view at zoom 1; zooming in
// scales it up. Square pixels, principal point at the frame center.
Intrinsics build_intrinsics(double zoom, int frame_width, int frame_height,
                            double base_hfov);

Extrinsics build_extrinsics(const Viewpoint& pose);

CameraModel make_camera(const Viewpoint& pose, double zoom, int frame_width,
                        int frame_height, double base_hfov);

// Projects a world point. Absent when the point is not in front of the
// camera (depth <= 0). Does not clip to the frame.
std::optional<PixelPoint> project(const CameraModel& cam,
                                  const Eigen::Vector3d& world_point);

// Maps a pixel back to the ground plane via the z=0 homography. Absent when
// the back-projected ray does not meet the ground in front of the camera
// (at or above the horizon).
std::optional<GroundPoint> inverse_project_ground(const CameraModel& cam,
                                                  double u, double v);

// Signed difference in (-pi, pi] between the camera yaw and the bearing from
// the camera ground position to `target`. Throws if the two coincide.
double yaw_error(const Viewpoint& pose, const GroundPoint& target);

}  // namespace camcover::geometry
