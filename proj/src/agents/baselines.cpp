#include "vdrive/agents/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace vdrive::agents {

Action RandomAgent::act(const Observation&, ActMode, Rng& rng) {
  const auto f = static_cast<int>(rng.index(space_.speed_count()));
  return space_.action(f, rng.index(space_.angle_count()));
}

Action IntelligentAgent::act(const Observation& obs, ActMode, Rng&) {
  const int f = space_.f_max() / 2;
  double theta = space_.angles()[space_.nearest_angle_index(obs.theta_lane)];
  const double gap = obs.lane_center - obs.x;
  if (std::abs(gap) > kDriftFraction * (obs.r_lane - obs.l_lane)) {
    // Headings below the lane angle move the agent right, above it left.
    theta += gap > 0.0 ? -kCorrection : kCorrection;
  }
  const double lo = space_.angles().front();
  const double hi = space_.angles().back();
  theta = std::clamp(theta, lo, hi);
  return space_.action(f, space_.nearest_angle_index(theta));
}

}  // namespace vdrive::agents
