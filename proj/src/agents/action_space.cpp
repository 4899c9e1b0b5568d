#include "vdrive/agents/action_space.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace vdrive::agents {

ActionSpace::ActionSpace(int f_max, std::vector<int> angles) : f_max_(f_max), angles_(std::move(angles)) {
  if (f_max_ < 1) throw std::invalid_argument("f_max must be at least 1");
  if (angles_.empty()) throw std::invalid_argument("angle set is empty");
}

ActionSpace ActionSpace::from(const EnvConfig& cfg) { return ActionSpace(cfg.f_max, cfg.angle_set()); }

std::size_t ActionSpace::joint_index(int f, std::size_t angle_index) const {
  if (f < 0 || f > f_max_) throw std::invalid_argument("speed " + std::to_string(f) + " out of range");
  if (angle_index >= angles_.size()) {
    throw std::invalid_argument("angle index " + std::to_string(angle_index) + " out of range");
  }
  return static_cast<std::size_t>(f) * angles_.size() + angle_index;
}

std::pair<int, std::size_t> ActionSpace::from_joint(std::size_t index) const {
  if (index >= joint_size()) throw std::invalid_argument("joint action index out of range");
  return {static_cast<int>(index / angles_.size()), index % angles_.size()};
}

Action ActionSpace::action(int f, std::size_t angle_index) const {
  joint_index(f, angle_index);
  return Action{f, angles_[angle_index]};
}

Action ActionSpace::joint_action(std::size_t index) const {
  const auto [f, a] = from_joint(index);
  return Action{f, angles_[a]};
}

std::size_t ActionSpace::angle_index(int theta) const {
  for (std::size_t i = 0; i < angles_.size(); ++i) {
    if (angles_[i] == theta) return i;
  }
  throw std::invalid_argument("angle " + std::to_string(theta) + " not in the angle set");
}

std::size_t ActionSpace::nearest_angle_index(double theta) const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < angles_.size(); ++i) {
    if (std::abs(angles_[i] - theta) < std::abs(angles_[best] - theta)) best = i;
  }
  return best;
}

}  // namespace vdrive::agents
