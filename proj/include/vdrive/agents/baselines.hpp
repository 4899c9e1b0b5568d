#pragma once

#include "vdrive/agents/agent.hpp"

namespace vdrive::agents {

/// f ~ U{0..f_max} and θ ~ U{angle set}, independently, in every mode.
class RandomAgent : public Agent {
 public:
  explicit RandomAgent(ActionSpace space) : space_(std::move(space)) {}

  AgentKind kind() const override { return AgentKind::kRandom; }
  const ActionSpace& action_space() const override { return space_; }
  Action act(const Observation& obs, ActMode mode, Rng& rng) override;

 private:
  ActionSpace space_;
};

/// Rule-based driver: half speed, heading aligned with the lanes, and a 30°
/// correction toward the lane-gap center once the agent drifts more than a
/// quarter of the road width away from it.
class IntelligentAgent : public Agent {
 public:
  explicit IntelligentAgent(ActionSpace space) : space_(std::move(space)) {}

  AgentKind kind() const override { return AgentKind::kIntelligent; }
  const ActionSpace& action_space() const override { return space_; }
  Action act(const Observation& obs, ActMode mode, Rng& rng) override;

  static constexpr double kDriftFraction = 0.25;
  static constexpr double kCorrection = 30.0;

 private:
  ActionSpace space_;
};

}  // namespace vdrive::agents
