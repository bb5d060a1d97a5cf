#include "addpg/replay/replay_buffer.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace addpg::replay {

ReplayBuffer::ReplayBuffer(std::size_t capacity, int state_dim, int action_dim)
    : capacity_(capacity), state_dim_(state_dim), action_dim_(action_dim) {
  if (capacity == 0) throw Error("replay capacity must be positive");
  if (state_dim < 1 || action_dim < 1) throw Error("replay dimensions must be positive");
  items_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::push(Transition t) {
  if (t.state.size() != state_dim_ || t.next_state.size() != state_dim_ || t.action.size() != action_dim_)
    throw Error("transition shape does not match the replay buffer");
  if (!std::isfinite(t.reward)) throw Error("transition reward is not finite");
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
    return;
  }
  items_[cursor_] = std::move(t);
  cursor_ = (cursor_ + 1) % capacity_;
}

std::vector<Transition> ReplayBuffer::sample_batch(std::size_t n, std::mt19937_64& rng) const {
  if (n < 1) throw Error("batch size must be at least 1");
  if (items_.size() < n)
    throw Error("replay holds " + std::to_string(items_.size()) + " transitions, fewer than the batch of " +
                std::to_string(n));
  std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
  std::vector<Transition> batch;
  batch.reserve(n);
  for (std::size_t i = 0; i < n; ++i) batch.push_back(items_[pick(rng)]);
  return batch;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= items_.size()) throw Error("replay index out of range");
  return items_[(cursor_ + i) % items_.size()];
}

}  // namespace addpg::replay
