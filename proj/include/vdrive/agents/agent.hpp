#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "vdrive/agents/action_space.hpp"
#include "vdrive/env.hpp"
#include "vdrive/nn/param_block.hpp"
#include "vdrive/rng.hpp"

namespace vdrive::agents {

enum class AgentKind { kPgMa, kPgSa, kA2cMa, kA2cSa, kDuelingDqn, kRandom, kIntelligent };

std::string_view to_string(AgentKind kind);
/// Accepts the names PG_MA, PG_SA, A2C_MA, A2C_SA, DUELING_DQN, RANDOM, INTELLIGENT.
AgentKind parse_agent_kind(std::string_view name);

enum class ActMode { kExplore, kExploit };

class Agent {
 public:
  virtual ~Agent() = default;

  virtual AgentKind kind() const = 0;
  virtual const ActionSpace& action_space() const = 0;
  virtual Action act(const Observation& obs, ActMode mode, Rng& rng) = 0;
  /// Learnable blocks in a stable order (checkpoint layout).
  virtual nn::ParamList parameters() { return {}; }
};

struct TrajectoryStep {
  Observation observation;
  Action action;
  double reward = 0.0;
  bool done = false;
};

/// One episode. final_observation is S_T, the state after the last step.
struct Trajectory {
  std::vector<TrajectoryStep> steps;
  Observation final_observation;
  double gamma = 0.99;

  std::vector<double> rewards() const;
  double total_reward() const;
  /// True when the last step ended the episode (rather than a horizon cut).
  bool terminal() const { return !steps.empty() && steps.back().done; }
};

/// G_t = Σ_{k≥t} γ^{k−t} r_{k+1}, by backward recursion.
std::vector<double> discounted_returns(std::span<const double> rewards, double gamma);

}  // namespace vdrive::agents
