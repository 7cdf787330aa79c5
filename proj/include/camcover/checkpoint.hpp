#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include "camcover/net.hpp"

namespace camcover {

// Versioned binary container, little-endian regardless of host byte order.
// Layout: magic, format version, topology, parameter tensors in fixed order;
// optionally followed by a trainer-state block (step counters, epsilon,
// optimizer moments, target-network parameters).

struct TrainerStateSnapshot {
  std::int64_t env_steps = 0;
  std::int64_t episodes = 0;
  double epsilon = 0.0;
  net::AdamState adam;
  net::NetworkParams target;
};

struct Checkpoint {
  net::NetworkParams online;
  std::optional<TrainerStateSnapshot> trainer;
};

class TopologyMismatchError : public std::runtime_error {
 public:
  TopologyMismatchError(const net::Topology& found,
                        const net::Topology& expected);
  net::Topology found;
  net::Topology expected;
};

void save_checkpoint(const std::string& path, const net::NetworkParams& online,
                     const TrainerStateSnapshot* trainer_state = nullptr);

Checkpoint load_checkpoint(const std::string& path);

// Loads just the online network and verifies it matches `expected`.
net::NetworkParams load_network_checked(const std::string& path,
                                        const net::Topology& expected);

}  // namespace camcover
