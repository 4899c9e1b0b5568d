#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <vector>

#include "vdrive/agents/agent.hpp"
#include "vdrive/agents/factory.hpp"
#include "vdrive/annotation.hpp"
#include "vdrive/config.hpp"
#include "vdrive/env.hpp"
#include "vdrive/metrics.hpp"

namespace vdrive {

struct Episode {
  agents::Trajectory trajectory;
  DoneReason done_reason = DoneReason::kNone;  // kNone when cut by the horizon
};

/// Runs one episode from env.reset(chunk) for at most max_steps steps.
/// on_step, when set, sees every transition (DQN replay and updates).
using StepHook = std::function<void(const Observation& before, const Action& action,
                                    const StepResult& result)>;
Episode rollout(DrivingEnv& env, agents::Agent& agent, const Chunk& chunk, const InitSpec& init,
                agents::ActMode mode, Rng& init_rng, Rng& policy_rng, int max_steps, double gamma,
                const StepHook& on_step = {});

struct ChunkVisit {
  int episode = 0;
  int chunk_id = 0;
};

struct TrainOptions {
  bool record_wall_clock = false;  // wall_ms stays 0 otherwise, keeping runs bitwise identical
  std::function<void(const MetricsRow&)> on_episode;
};

struct TrainResult {
  TrainConfig config;
  std::unique_ptr<agents::Agent> agent;
  std::vector<MetricsRow> metrics;
  ChunkSplit split;
  std::vector<ChunkVisit> audit;  // chunk chosen for every training episode
};

agents::AgentOptions agent_options(const TrainConfig& config, const EnvConfig& env);
std::unique_ptr<agents::Agent> build_agent(const TrainConfig& config, const EnvConfig& env);

/// Trains on uniformly drawn train chunks with randomized starts and explore
/// mode. Throws nn::NumericError (with the episode number) on divergence.
TrainResult train(const TrainConfig& config, const VideoAnnotation& video,
                  const TrainOptions& options = {});

/// Checkpoint with the full training config embedded.
void save_trained_agent(const std::filesystem::path& path, agents::Agent& agent,
                        const TrainConfig& config);

struct LoadedAgent {
  TrainConfig config;
  std::unique_ptr<agents::Agent> agent;
};

/// Rebuilds the agent for a video of the given frame size and loads weights.
/// Throws nn::CheckpointError on a version or layout mismatch.
LoadedAgent load_trained_agent(const std::filesystem::path& path, int frame_width,
                               int frame_height);

struct EvalStep {
  int frame = 0;
  double x = 0.0;
  Action action;
  double reward = 0.0;
  double m_next = 0.0;
};

struct EvalResult {
  double total_reward = 0.0;
  int length = 0;
  DoneReason done_reason = DoneReason::kNone;
  std::vector<EvalStep> trace;
};

/// One exploit-mode episode over the whole video from the fixed start.
EvalResult evaluate(agents::Agent& agent, const VideoAnnotation& video, const EnvConfig& env,
                    std::uint64_t seed, int max_steps);

}  // namespace vdrive
