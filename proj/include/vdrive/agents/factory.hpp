#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include "vdrive/agents/agent.hpp"
#include "vdrive/agents/dqn_agent.hpp"
#include "vdrive/agents/policy_agent.hpp"
#include "vdrive/nn/checkpoint.hpp"

namespace vdrive::agents {

struct AgentOptions {
  nn::EncoderSpec encoder;
  std::size_t hidden = 32;
  DqnOptions dqn;  // encoder and hidden are taken from the fields above
};

std::unique_ptr<Agent> make_agent(AgentKind kind, const ActionSpace& space,
                                  const AgentOptions& options, std::uint64_t weight_seed,
                                  std::uint64_t exploration_seed);

/// One file per agent: kind, the given config entries and every block.
void save_agent(const std::filesystem::path& path, Agent& agent,
                const std::map<std::string, std::string>& config);

/// Copies checkpoint weights into an agent of the same kind and layout.
/// Throws nn::CheckpointError otherwise.
void restore_agent(const nn::Checkpoint& checkpoint, Agent& agent);

}  // namespace vdrive::agents
