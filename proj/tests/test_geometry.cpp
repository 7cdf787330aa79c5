#include <doctest.h>

#include <cmath>

#include "camcover/geometry.hpp"
#include "camcover/rng.hpp"

using namespace camcover;
using namespace camcover::geometry;

namespace {

CameraModel standard_camera(double zoom = 1.0, double pitch = 0.0) {
  Viewpoint vp;
  vp.position = Eigen::Vector3d(0.0, -2500.0, 500.0);
  vp.yaw = kPi / 2.0;  // facing +y
  vp.pitch = pitch;
  return make_camera(vp, zoom, 640, 480, kPi / 2.0);
}

Viewpoint random_pose(Rng& rng) {
  Viewpoint vp;
  vp.position = Eigen::Vector3d(rng.uniform(-6000.0, 6000.0),
                                rng.uniform(-6000.0, 6000.0),
                                rng.uniform(200.0, 1000.0));
  vp.yaw = rng.uniform(-kPi, kPi);
  vp.pitch = rng.uniform(deg_to_rad(-30.0), deg_to_rad(-1.0));
  return vp;
}

}  // namespace

TEST_CASE("intrinsics follow zoom and frame geometry") {
  const auto k = build_intrinsics(1.0, 640, 480, kPi / 2.0);
  CHECK(k.fx == doctest::Approx(320.0).epsilon(1e-12));
  CHECK(k.fy == doctest::Approx(320.0).epsilon(1e-12));
  CHECK(k.u0 == 320.0);
  CHECK(k.v0 == 240.0);

  CHECK(build_intrinsics(2.0, 640, 480, kPi / 2.0).fx ==
        doctest::Approx(640.0).epsilon(1e-12));
  CHECK(build_intrinsics(1.1, 640, 480, kPi / 2.0).fx ==
        doctest::Approx(352.0).epsilon(1e-12));

  CHECK_THROWS_AS(build_intrinsics(0.0, 640, 480, kPi / 2.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_intrinsics(-1.0, 640, 480, kPi / 2.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_intrinsics(1.0, 640, 480, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_intrinsics(1.0, 640, 480, kPi), std::invalid_argument);
}

TEST_CASE("extrinsics map the camera center to the camera-frame origin") {
  Viewpoint vp;
  vp.position = Eigen::Vector3d(0.0, -2500.0, 500.0);
  vp.yaw = kPi / 2.0;
  vp.pitch = 0.0;
  const auto e = build_extrinsics(vp);
  const Eigen::Vector3d mapped = e.rotation * vp.position + e.translation;
  CHECK(mapped.norm() < 1e-9);
}

TEST_CASE("the identity orientation is straight up with +x to the right") {
  Viewpoint vp;
  vp.position = Eigen::Vector3d::Zero();
  vp.yaw = kPi / 2.0;
  vp.pitch = kPi / 2.0;
  const auto e = build_extrinsics(vp);
  CHECK((e.rotation - Eigen::Matrix3d::Identity()).norm() < 1e-12);
  CHECK(e.translation.norm() < 1e-12);
}

TEST_CASE("rotations stay orthonormal with unit determinant") {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const auto e = build_extrinsics(random_pose(rng));
    const Eigen::Matrix3d gram =
        e.rotation.transpose() * e.rotation - Eigen::Matrix3d::Identity();
    CHECK(gram.norm() < 1e-9);
    CHECK(e.rotation.determinant() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("projection hits the principal point on the optical axis") {
  const auto cam = standard_camera();
  const auto px = project(cam, Eigen::Vector3d(0.0, 0.0, 500.0));
  REQUIRE(px.has_value());
  CHECK(px->u == doctest::Approx(320.0).epsilon(1e-12));
  CHECK(px->v == doctest::Approx(240.0).epsilon(1e-12));
  CHECK(px->depth == doctest::Approx(2500.0).epsilon(1e-12));
}

TEST_CASE("projection of the court center ground point") {
  const auto cam = standard_camera();
  const auto px = project(cam, Eigen::Vector3d::Zero());
  REQUIRE(px.has_value());
  // v = 240 + f * height / depth
  CHECK(px->u == doctest::Approx(320.0).epsilon(1e-12));
  CHECK(px->v == doctest::Approx(240.0 + 320.0 * 500.0 / 2500.0).epsilon(1e-12));
  CHECK(px->depth == doctest::Approx(2500.0).epsilon(1e-12));
}

TEST_CASE("points behind the camera do not project") {
  const auto cam = standard_camera();
  CHECK_FALSE(project(cam, Eigen::Vector3d(0.0, -3000.0, 500.0)).has_value());
}

TEST_CASE("inverse projection recovers the court center") {
  const auto cam = standard_camera();
  const auto gp = inverse_project_ground(cam, 320.0, 304.0);
  REQUIRE(gp.has_value());
  CHECK(std::abs(gp->x) < 1e-6);
  CHECK(std::abs(gp->y) < 1e-6);
}

TEST_CASE("pixels at or above the horizon are rejected") {
  const auto cam = standard_camera();  // pitch 0: horizon at v = v0
  CHECK_FALSE(inverse_project_ground(cam, 320.0, 240.0).has_value());
  CHECK_FALSE(inverse_project_ground(cam, 320.0, 239.0).has_value());
  CHECK_FALSE(inverse_project_ground(cam, 320.0, 100.0).has_value());
  CHECK(inverse_project_ground(cam, 320.0, 241.0).has_value());
}

TEST_CASE("project then inverse-project is the identity on the ground") {
  Rng rng(11);
  double worst = 0.0;
  int tested = 0;
  while (tested < 1000) {
    const auto pose = random_pose(rng);
    const auto cam = make_camera(pose, rng.uniform(0.5, 2.0), 640, 480,
                                 kPi / 2.0);
    const Eigen::Vector3d p(rng.uniform(-6000.0, 6000.0),
                            rng.uniform(-6000.0, 6000.0), 0.0);
    const auto px = project(cam, p);
    if (!px || px->depth > 20000.0) continue;
    const auto back = inverse_project_ground(cam, px->u, px->v);
    REQUIRE(back.has_value());
    worst = std::max(worst, std::hypot(back->x - p.x(), back->y - p.y()));
    ++tested;
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("doubling zoom doubles pixel offsets from the principal point") {
  const auto cam1 = standard_camera(1.0);
  const auto cam2 = standard_camera(2.0);
  const Eigen::Vector3d p(123.0, -700.0, 40.0);
  const auto a = project(cam1, p);
  const auto b = project(cam2, p);
  REQUIRE(a.has_value());
  REQUIRE(b.has_value());
  CHECK(b->u - 320.0 == doctest::Approx(2.0 * (a->u - 320.0)).epsilon(1e-9));
  CHECK(b->v - 240.0 == doctest::Approx(2.0 * (a->v - 240.0)).epsilon(1e-9));
}

TEST_CASE("yaw error wraps into (-pi, pi]") {
  Viewpoint vp;
  vp.position = Eigen::Vector3d::Zero();

  vp.yaw = 0.3;
  CHECK(yaw_error(vp, {std::cos(0.3) * 100.0, std::sin(0.3) * 100.0}) ==
        doctest::Approx(0.0).epsilon(1e-12));

  vp.yaw = kPi / 2.0;
  CHECK(yaw_error(vp, {100.0, 0.0}) == doctest::Approx(kPi / 2.0));

  vp.yaw = deg_to_rad(350.0);
  const GroundPoint bearing10{std::cos(deg_to_rad(10.0)) * 50.0,
                              std::sin(deg_to_rad(10.0)) * 50.0};
  CHECK(yaw_error(vp, bearing10) == doctest::Approx(deg_to_rad(-20.0)));

  CHECK_THROWS_AS(yaw_error(vp, {0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("wrap_angle maps onto (-pi, pi]") {
  CHECK(wrap_angle(kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(3.0 * kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(0.1) == doctest::Approx(0.1));
  CHECK(wrap_angle(2.0 * kPi + 0.1) == doctest::Approx(0.1));
  CHECK(wrap_angle(-0.1 - 4.0 * kPi) == doctest::Approx(-0.1));
}
