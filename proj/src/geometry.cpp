#include "camcover/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace camcover::geometry {

double wrap_angle(double a) {
  double r = std::remainder(a, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

Eigen::Matrix3d Intrinsics::matrix() const {
  Eigen::Matrix3d k;
  k << fx, 0.0, u0, 0.0, fy, v0, 0.0, 0.0, 1.0;
  return k;
}

Intrinsics build_intrinsics(double zoom, int frame_width, int frame_height,
                            double base_hfov) {
  if (zoom <= 0.0) throw std::invalid_argument("zoom must be positive");
  if (!(base_hfov > 0.0) || !(base_hfov < kPi))
    throw std::invalid_argument("horizontal fov must lie in (0, pi)");
  if (frame_width <= 0 || frame_height <= 0)
    throw std::invalid_argument("frame dimensions must be positive");

  Intrinsics k;
  k.fx = zoom * (frame_width / 2.0) / std::tan(base_hfov / 2.0);
  k.fy = k.fx;
  k.u0 = frame_width / 2.0;
  k.v0 = frame_height / 2.0;
  return k;
}

Extrinsics build_extrinsics(const Viewpoint& pose) {
  const double cy = std::cos(pose.yaw), sy = std::sin(pose.yaw);
  const double cp = std::cos(pose.pitch), sp = std::sin(pose.pitch);

  // Camera axes in world coordinates: x_cam right, y_cam down (image v),
  // z_cam forward along the optical axis.
  const Eigen::Vector3d forward(cp * cy, cp * sy, sp);
  const Eigen::Vector3d right(sy, -cy, 0.0);
  const Eigen::Vector3d down = forward.cross(right);

  Extrinsics e;
  e.rotation.row(0) = right;
  e.rotation.row(1) = down;
  e.rotation.row(2) = forward;
  e.translation = -e.rotation * pose.position;
  return e;
}

CameraModel make_camera(const Viewpoint& pose, double zoom, int frame_width,
                        int frame_height, double base_hfov) {
  CameraModel cam;
  cam.intrinsics = build_intrinsics(zoom, frame_width, frame_height, base_hfov);
  cam.extrinsics = build_extrinsics(pose);
  cam.frame_width = frame_width;
  cam.frame_height = frame_height;
  return cam;
}

std::optional<PixelPoint> project(const CameraModel& cam,
                                  const Eigen::Vector3d& world_point) {
  const Eigen::Vector3d pc =
      cam.extrinsics.rotation * world_point + cam.extrinsics.translation;
  if (pc.z() <= 0.0) return std::nullopt;

  PixelPoint px;
  px.u = cam.intrinsics.u0 + cam.intrinsics.fx * pc.x() / pc.z();
  px.v = cam.intrinsics.v0 + cam.intrinsics.fy * pc.y() / pc.z();
  px.depth = pc.z();
  return px;
}

std::optional<GroundPoint> inverse_project_ground(const CameraModel& cam,
                                                  double u, double v) {
  // On z = 0 the projection collapses to a homography built from the first
  // two rotation columns and the translation.
  Eigen::Matrix3d h;
  h.col(0) = cam.extrinsics.rotation.col(0);
  h.col(1) = cam.extrinsics.rotation.col(1);
  h.col(2) = cam.extrinsics.translation;
  h = cam.intrinsics.matrix() * h;

  const Eigen::PartialPivLU<Eigen::Matrix3d> lu(h);
  const Eigen::Vector3d w = lu.solve(Eigen::Vector3d(u, v, 1.0));
  // w = (x, y, 1) / z_c; the ray meets the ground in front only when the
  // scale is strictly positive.
  if (!(w.z() > 1e-12)) return std::nullopt;
  if (!std::isfinite(w.x()) || !std::isfinite(w.y()) || !std::isfinite(w.z()))
    return std::nullopt;
  return GroundPoint{w.x() / w.z(), w.y() / w.z()};
}

double yaw_error(const Viewpoint& pose, const GroundPoint& target) {
  const double dx = target.x - pose.position.x();
  const double dy = target.y - pose.position.y();
  if (std::hypot(dx, dy) < 1e-9)
    throw std::invalid_argument("target coincides with the camera position");
  return wrap_angle(pose.yaw - std::atan2(dy, dx));
}

}  // namespace camcover::geometry
