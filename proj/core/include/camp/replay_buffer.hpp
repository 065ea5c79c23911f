#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "camp/rng.hpp"

namespace camp::replay {

// One interaction. s and s_next are the clean stacked observations; the
// acting network saw s + eps.
struct Transition {
  Eigen::VectorXd s;
  Eigen::VectorXd eps;
  Eigen::VectorXd s_next;
  Eigen::VectorXd eps_next;
  int action = 0;
  double reward = 0.0;
  bool done = false;
};

// Fixed-capacity ring; once full the oldest entry is overwritten.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::size_t obs_dim);

  void push(Transition t);

  // n draws uniformly with replacement. Throws UsageError when empty.
  std::vector<Transition> sample_batch(std::size_t n, Engine& rng) const;
  std::vector<const Transition*> sample_refs(std::size_t n, Engine& rng) const;

  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t obs_dim() const { return obs_dim_; }
  bool empty() const { return entries_.empty(); }

  // i-th oldest entry.
  const Transition& at(std::size_t i) const;

 private:
  std::size_t capacity_;
  std::size_t obs_dim_;
  std::size_t cursor_ = 0;
  std::vector<Transition> entries_;
};

}  // namespace camp::replay
