#pragma once

#include <Eigen/Dense>
#include <vector>

#include "camcover/world.hpp"

namespace camcover {

// Optional stand-in for an imperfect pixel-space detector. Disabled by
// default, in which case boxes pass through untouched.
struct DetectorNoiseModel {
  bool enabled = false;
  double miss_probability = 0.0;
  double pixel_jitter_sigma = 0.0;

  void validate() const;
};

// One detected target: its (possibly noisy) box and the ground coordinate
// recovered from the bottom-midpoint of that box.
struct Detection {
  BoundingBox box;
  geometry::GroundPoint estimated;
};

struct AgentObservation {
  std::vector<Detection> detections;
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
  double zoom = 1.0;
  std::vector<double> l1_to_others;  // ascending camera index, self skipped
};

using JointObservation = std::vector<AgentObservation>;

std::vector<BoundingBox> detect(const std::vector<BoundingBox>& boxes,
                                const DetectorNoiseModel& noise, Rng& rng,
                                int frame_width, int frame_height);

// Back-projects each box's bottom-midpoint to the ground plane. Boxes whose
// midpoint ray misses the ground in front of the camera are dropped.
std::vector<Detection> estimate_coordinates(
    const std::vector<BoundingBox>& boxes, const geometry::CameraModel& cam);

JointObservation build_joint_observation(
    const WorldState& state,
    const std::vector<std::vector<Detection>>& per_camera);

// Everything one simulation step produces for perception and rewards.
// `true_*` members come straight from the simulator; `observed` has the
// noise model applied (identical to true_detections when noise is off).
struct SenseResult {
  std::vector<std::vector<BoundingBox>> true_boxes;
  std::vector<std::vector<Detection>> true_detections;
  std::vector<std::vector<Detection>> observed;
  VisibilityMatrix visibility;
};

SenseResult sense(const WorldState& state, const DetectorNoiseModel& noise,
                  Rng& rng);

// Flat network input for one agent:
//   [slot_0 .. slot_{M-1} | x y yaw zoom | l1 distances] ++ [one-hot | a_{t-1}]
// with each slot = (x_est, y_est, presence), coordinates normalized by the
// court half-extents, slots filled in descending box-area order. The trailing
// identity/last-action part is kept out of the encoder by the network.
int encoded_feature_dim(const WorldConfig& cfg);
int encoded_extra_dim(const WorldConfig& cfg);
int encoded_total_dim(const WorldConfig& cfg);

Eigen::VectorXd encode(const JointObservation& joint, int agent_index,
                       const std::vector<Action>& last_actions,
                       const WorldConfig& cfg);

}  // namespace camcover
