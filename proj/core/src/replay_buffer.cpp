#include "camp/replay_buffer.hpp"

#include <algorithm>
#include <string>

#include "camp/errors.hpp"

namespace camp::replay {

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t obs_dim)
    : capacity_(capacity), obs_dim_(obs_dim) {
  if (capacity == 0) {
    throw UsageError("replay buffer capacity must be positive");
  }
  entries_.reserve(std::min<std::size_t>(capacity, 1u << 16));
}

void ReplayBuffer::push(Transition t) {
  const auto dim = static_cast<Eigen::Index>(obs_dim_);
  if (t.s.size() != dim || t.eps.size() != dim || t.s_next.size() != dim || t.eps_next.size() != dim) {
    throw UsageError("transition vectors must have length " + std::to_string(obs_dim_));
  }
  if (entries_.size() < capacity_) {
    entries_.push_back(std::move(t));
  } else {
    entries_[cursor_] = std::move(t);
  }
  cursor_ = (cursor_ + 1) % capacity_;
}

std::vector<const Transition*> ReplayBuffer::sample_refs(std::size_t n, Engine& rng) const {
  if (entries_.empty()) {
    throw UsageError("cannot sample from an empty replay buffer");
  }
  std::vector<const Transition*> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(&entries_[uniform_index(rng, entries_.size())]);
  }
  return out;
}

std::vector<Transition> ReplayBuffer::sample_batch(std::size_t n, Engine& rng) const {
  std::vector<Transition> out;
  out.reserve(n);
  for (const Transition* t : sample_refs(n, rng)) {
    out.push_back(*t);
  }
  return out;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= entries_.size()) {
    throw UsageError("replay index out of range");
  }
  if (entries_.size() < capacity_) {
    return entries_[i];
  }
  return entries_[(cursor_ + i) % capacity_];
}

}  // namespace camp::replay
