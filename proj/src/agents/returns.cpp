#include <stdexcept>
#include <string>

#include "vdrive/agents/agent.hpp"

namespace vdrive::agents {

std::string_view to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::kPgMa:
      return "PG_MA";
    case AgentKind::kPgSa:
      return "PG_SA";
    case AgentKind::kA2cMa:
      return "A2C_MA";
    case AgentKind::kA2cSa:
      return "A2C_SA";
    case AgentKind::kDuelingDqn:
      return "DUELING_DQN";
    case AgentKind::kRandom:
      return "RANDOM";
    case AgentKind::kIntelligent:
      return "INTELLIGENT";
  }
  return "UNKNOWN";
}

AgentKind parse_agent_kind(std::string_view name) {
  for (AgentKind k : {AgentKind::kPgMa, AgentKind::kPgSa, AgentKind::kA2cMa, AgentKind::kA2cSa,
                      AgentKind::kDuelingDqn, AgentKind::kRandom, AgentKind::kIntelligent}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown agent kind: " + std::string(name));
}

std::vector<double> Trajectory::rewards() const {
  std::vector<double> r;
  r.reserve(steps.size());
  for (const TrajectoryStep& s : steps) r.push_back(s.reward);
  return r;
}

double Trajectory::total_reward() const {
  double sum = 0.0;
  for (const TrajectoryStep& s : steps) sum += s.reward;
  return sum;
}

std::vector<double> discounted_returns(std::span<const double> rewards, double gamma) {
  std::vector<double> g(rewards.size());
  double running = 0.0;
  for (std::size_t t = rewards.size(); t-- > 0;) {
    running = rewards[t] + gamma * running;
    g[t] = running;
  }
  return g;
}

}  // namespace vdrive::agents
