#include "vdrive/agents/factory.hpp"

#include "vdrive/agents/baselines.hpp"

namespace vdrive::agents {

std::unique_ptr<Agent> make_agent(AgentKind kind, const ActionSpace& space,
                                  const AgentOptions& options, std::uint64_t weight_seed,
                                  std::uint64_t exploration_seed) {
  switch (kind) {
    case AgentKind::kPgMa:
    case AgentKind::kPgSa:
    case AgentKind::kA2cMa:
    case AgentKind::kA2cSa:
      return std::make_unique<PolicyAgent>(kind, space,
                                           PolicyAgentOptions{options.encoder, options.hidden},
                                           weight_seed);
    case AgentKind::kDuelingDqn: {
      DqnOptions dqn = options.dqn;
      dqn.encoder = options.encoder;
      dqn.hidden = options.hidden;
      return std::make_unique<DuelingDqnAgent>(space, dqn, weight_seed, exploration_seed);
    }
    case AgentKind::kRandom:
      return std::make_unique<RandomAgent>(space);
    case AgentKind::kIntelligent:
      return std::make_unique<IntelligentAgent>(space);
  }
  throw std::invalid_argument("unknown agent kind");
}

void save_agent(const std::filesystem::path& path, Agent& agent,
                const std::map<std::string, std::string>& config) {
  const nn::ParamList blocks = agent.parameters();
  nn::save_checkpoint(path, std::string(to_string(agent.kind())), config, blocks);
}

void restore_agent(const nn::Checkpoint& checkpoint, Agent& agent) {
  if (checkpoint.kind != to_string(agent.kind())) {
    throw nn::CheckpointError("checkpoint holds a " + checkpoint.kind + " agent, expected " +
                              std::string(to_string(agent.kind())));
  }
  const nn::ParamList blocks = agent.parameters();
  nn::assign_blocks(checkpoint, blocks);
  if (auto* dqn = dynamic_cast<DuelingDqnAgent*>(&agent)) dqn->sync_target();
}

}  // namespace vdrive::agents
