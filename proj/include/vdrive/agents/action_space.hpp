#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "vdrive/env.hpp"

namespace vdrive::agents {

/// Discrete (speed, angle) grid. The joint index is row-major in speed:
/// index = f·|angles| + angle_index.
class ActionSpace {
 public:
  ActionSpace(int f_max, std::vector<int> angles);
  static ActionSpace from(const EnvConfig& cfg);

  int f_max() const { return f_max_; }
  std::size_t speed_count() const { return static_cast<std::size_t>(f_max_) + 1; }
  std::size_t angle_count() const { return angles_.size(); }
  std::size_t joint_size() const { return speed_count() * angle_count(); }
  const std::vector<int>& angles() const { return angles_; }

  /// Throws std::invalid_argument when a component is out of range.
  std::size_t joint_index(int f, std::size_t angle_index) const;
  std::pair<int, std::size_t> from_joint(std::size_t index) const;

  Action action(int f, std::size_t angle_index) const;
  Action joint_action(std::size_t index) const;
  std::size_t angle_index(int theta) const;
  std::size_t joint_index(const Action& a) const { return joint_index(a.f, angle_index(a.theta)); }
  /// Grid angle closest to theta (ties resolve to the smaller angle).
  std::size_t nearest_angle_index(double theta) const;

 private:
  int f_max_;
  std::vector<int> angles_;
};

}  // namespace vdrive::agents
