#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "vdrive/env.hpp"
#include "vdrive/rng.hpp"

namespace vdrive::agents {

struct Transition {
  Observation state;
  Action action;
  double reward = 0.0;
  Observation next_state;
  bool done = false;
  std::uint64_t serial = 0;  // insertion counter, assigned by push
};

/// Fixed-capacity FIFO ring of transitions with uniform batch sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 5000);

  void push(Transition t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::uint64_t pushed() const { return next_serial_; }

  /// Distinct uniformly chosen transitions (Floyd's sampling).
  /// Throws std::invalid_argument if batch > size().
  std::vector<const Transition*> sample(std::size_t batch, Rng& rng) const;
  std::vector<std::size_t> sample_indices(std::size_t batch, Rng& rng) const;

  const Transition& at(std::size_t i) const { return items_.at(i); }

 private:
  std::size_t capacity_;
  std::vector<Transition> items_;
  std::size_t head_ = 0;  // slot overwritten next once full
  std::uint64_t next_serial_ = 0;
};

}  // namespace vdrive::agents
