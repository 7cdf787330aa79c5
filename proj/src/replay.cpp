#include "camcover/replay.hpp"

#include <numeric>
#include <stdexcept>

namespace camcover {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("buffer capacity must be > 0");
}

void ReplayBuffer::add(EpisodeRecord episode) {
  if (episode.length() == 0)
    throw std::invalid_argument("cannot store an empty episode");
  if (episodes_.size() == capacity_) episodes_.pop_front();
  episodes_.push_back(std::move(episode));
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch,
                                                      Rng& rng) const {
  if (batch > episodes_.size())
    throw std::invalid_argument("batch larger than buffer contents");

  // Partial Fisher-Yates: the first `batch` entries are a uniform draw
  // without replacement.
  std::vector<std::size_t> idx(episodes_.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t k = 0; k < batch; ++k) {
    const std::size_t j =
        k + static_cast<std::size_t>(
                rng.uniform_int(static_cast<int>(idx.size() - k)));
    std::swap(idx[k], idx[j]);
  }
  idx.resize(batch);
  return idx;
}

}  // namespace camcover
