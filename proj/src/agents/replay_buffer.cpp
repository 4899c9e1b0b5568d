#include "vdrive/agents/replay_buffer.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace vdrive::agents {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw std::invalid_argument("replay capacity must be positive");
  items_.reserve(capacity_);
}

void ReplayBuffer::push(Transition t) {
  t.serial = next_serial_++;
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
    return;
  }
  items_[head_] = std::move(t);
  head_ = (head_ + 1) % capacity_;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch, Rng& rng) const {
  const std::size_t n = items_.size();
  if (batch > n) throw std::invalid_argument("replay buffer holds fewer transitions than the batch");
  std::vector<std::size_t> out;
  out.reserve(batch);
  std::unordered_set<std::size_t> chosen;
  for (std::size_t j = n - batch; j < n; ++j) {
    const std::size_t t = rng.index(j + 1);
    if (chosen.insert(t).second) {
      out.push_back(t);
    } else {
      chosen.insert(j);
      out.push_back(j);
    }
  }
  return out;
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t batch, Rng& rng) const {
  std::vector<const Transition*> out;
  for (std::size_t i : sample_indices(batch, rng)) out.push_back(&items_[i]);
  return out;
}

}  // namespace vdrive::agents
