#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <deque>
#include <vector>

#include "camcover/rng.hpp"
#include "camcover/world.hpp"

namespace camcover {

// One full episode. Observations are the encoded per-agent vectors; index t
// runs over [0, length] so obs[length] is the post-final observation used to
// bootstrap the last transition.
struct EpisodeRecord {
  std::vector<std::vector<Eigen::VectorXd>> obs;  // [t][agent]
  std::vector<std::vector<Action>> actions;       // [t][agent], t < length
  std::vector<std::vector<double>> rewards;       // [t][agent]
  std::vector<std::uint8_t> truncated;            // [t]; 1 = cut by the clock

  int length() const { return static_cast<int>(actions.size()); }
  int n_agents() const {
    return obs.empty() ? 0 : static_cast<int>(obs.front().size());
  }
};

// A view of one transition inside an episode.
struct Transition {
  const std::vector<Eigen::VectorXd>& encoded;
  const std::vector<Action>& joint_action;
  const std::vector<double>& rewards;
  const std::vector<Eigen::VectorXd>& next_encoded;
  bool truncated;
};

inline Transition transition_at(const EpisodeRecord& ep, int t) {
  return Transition{ep.obs[t], ep.actions[t], ep.rewards[t], ep.obs[t + 1],
                    ep.truncated[t] != 0};
}

// Episode-granular ring buffer, FIFO eviction.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void add(EpisodeRecord episode);
  std::size_t size() const { return episodes_.size(); }
  std::size_t capacity() const { return capacity_; }
  const EpisodeRecord& at(std::size_t i) const { return episodes_[i]; }

  // Uniform sample of distinct episode indices.
  std::vector<std::size_t> sample_indices(std::size_t batch, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::deque<EpisodeRecord> episodes_;
};

}  // namespace camcover
