#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "addpg/common.hpp"

namespace addpg::replay {

struct Transition {
  Vector state;
  Vector action;
  double reward = 0.0;
  Vector next_state;
  bool done = false;
};

/// Fixed-capacity ring of transitions; the oldest entry is overwritten first.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, int state_dim, int action_dim);

  void push(Transition t);

  /// n draws, uniform with replacement.
  std::vector<Transition> sample_batch(std::size_t n, std::mt19937_64& rng) const;

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return items_.empty(); }

  /// i-th oldest stored transition.
  const Transition& at(std::size_t i) const;

 private:
  std::size_t capacity_;
  int state_dim_;
  int action_dim_;
  std::vector<Transition> items_;
  std::size_t cursor_ = 0;  // next slot to overwrite once full
};

}  // namespace addpg::replay
