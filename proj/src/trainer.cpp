#include "vdrive/trainer.hpp"

#include <chrono>
#include <string>

#include "vdrive/agents/dqn_agent.hpp"
#include "vdrive/agents/policy_agent.hpp"
#include "vdrive/agents/replay_buffer.hpp"

namespace vdrive {

using agents::ActMode;
using agents::AgentKind;

Episode rollout(DrivingEnv& env, agents::Agent& agent, const Chunk& chunk, const InitSpec& init,
                ActMode mode, Rng& init_rng, Rng& policy_rng, int max_steps, double gamma,
                const StepHook& on_step) {
  Episode ep;
  ep.trajectory.gamma = gamma;
  Observation obs = env.reset(chunk, init, init_rng);
  for (int t = 0; t < max_steps; ++t) {
    const Action action = agent.act(obs, mode, policy_rng);
    StepResult result = env.step(action);
    if (on_step) on_step(obs, action, result);
    ep.trajectory.steps.push_back({std::move(obs), action, result.reward, result.done});
    obs = std::move(result.observation);
    if (result.done) {
      ep.done_reason = result.done_reason;
      break;
    }
  }
  ep.trajectory.final_observation = std::move(obs);
  return ep;
}

agents::AgentOptions agent_options(const TrainConfig& config, const EnvConfig& env) {
  agents::AgentOptions opts;
  opts.encoder = resolve_encoder(config, env);
  opts.hidden = config.hidden;
  opts.dqn.batch = config.dqn_batch;
  opts.dqn.target_sync = config.target_sync;
  opts.dqn.epsilon_start = config.epsilon_start;
  opts.dqn.epsilon_end = config.epsilon_end;
  opts.dqn.anneal_fraction = config.anneal_fraction;
  return opts;
}

std::unique_ptr<agents::Agent> build_agent(const TrainConfig& config, const EnvConfig& env) {
  return agents::make_agent(config.agent, agents::ActionSpace::from(env), agent_options(config, env),
                            derive_seed(config.seed, Stream::kWeights),
                            derive_seed(config.seed, Stream::kEpsilon));
}

TrainResult train(const TrainConfig& config, const VideoAnnotation& video,
                  const TrainOptions& options) {
  config.validate();
  TrainResult out;
  out.config = config;
  const EnvConfig env_cfg = resolve_env(config, video.width, video.height);
  const std::vector<Chunk> chunks = chunk_video(video, config.window, config.stride);
  if (chunks.size() < 2) {
    throw ConfigError("window/stride leave fewer than two chunks; no train/test split possible");
  }
  out.split = split_chunks(chunks, config.train_fraction, derive_seed(config.seed, Stream::kSplit));
  out.agent = build_agent(config, env_cfg);
  agents::Agent& agent = *out.agent;

  DrivingEnv env(video, env_cfg);
  Rng chunk_rng(derive_seed(config.seed, Stream::kChunks));
  Rng init_rng(derive_seed(config.seed, Stream::kInit));
  Rng policy_rng(derive_seed(config.seed, Stream::kPolicy));
  Rng replay_rng(derive_seed(config.seed, Stream::kReplay));

  auto* policy = dynamic_cast<agents::PolicyAgent*>(&agent);
  auto* dqn = dynamic_cast<agents::DuelingDqnAgent*>(&agent);
  agents::ReplayBuffer buffer(dqn != nullptr ? config.replay_capacity : 1);
  StepHook dqn_hook;
  if (dqn != nullptr) {
    dqn_hook = [&](const Observation& before, const Action& action, const StepResult& r) {
      buffer.push({before, action, r.reward, r.observation, r.done, 0});
      agents::dqn_update(*dqn, buffer, replay_rng, config.lr, config.gamma);
    };
  }

  const bool is_pg = config.agent == AgentKind::kPgMa || config.agent == AgentKind::kPgSa;
  const bool is_a2c = config.agent == AgentKind::kA2cMa || config.agent == AgentKind::kA2cSa;
  std::vector<agents::Trajectory> pending;
  RollingMean rolling(static_cast<std::size_t>(config.rolling_n));

  for (int ep = 0; ep < config.episodes; ++ep) {
    const auto t0 = std::chrono::steady_clock::now();
    const Chunk& chunk = out.split.train[chunk_rng.index(out.split.train.size())];
    out.audit.push_back({ep, chunk.id});
    if (dqn != nullptr) {
      dqn->set_epsilon(agents::annealed_epsilon(static_cast<double>(ep) / config.episodes, dqn->options()));
    }

    Episode episode;
    try {
      episode = rollout(env, agent, chunk, InitSpec{InitMode::kRandomized}, ActMode::kExplore,
                        init_rng, policy_rng, config.max_episode_steps, config.gamma, dqn_hook);
      if (is_pg) {
        pending.push_back(episode.trajectory);
        if (static_cast<int>(pending.size()) == config.batch_size || ep + 1 == config.episodes) {
          agents::pg_update(*policy, pending, config.lr);
          pending.clear();
        }
      } else if (is_a2c) {
        agents::a2c_update(*policy, episode.trajectory, config.lr, config.lr_critic);
      }
    } catch (const nn::NumericError& e) {
      throw nn::NumericError("episode " + std::to_string(ep) + ": " + e.what());
    }

    MetricsRow row;
    row.episode = ep;
    row.total_reward = episode.trajectory.total_reward();
    row.length = static_cast<int>(episode.trajectory.steps.size());
    row.done_reason = episode.done_reason;
    row.rolling_mean = rolling.push(row.total_reward);
    if (options.record_wall_clock) {
      row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    }
    out.metrics.push_back(row);
    if (options.on_episode) options.on_episode(row);
  }
  return out;
}

void save_trained_agent(const std::filesystem::path& path, agents::Agent& agent,
                        const TrainConfig& config) {
  agents::save_agent(path, agent, config.to_map());
}

LoadedAgent load_trained_agent(const std::filesystem::path& path, int frame_width,
                               int frame_height) {
  const nn::Checkpoint ckpt = nn::load_checkpoint(path);
  LoadedAgent out;
  try {
    out.config = config_from_map(ckpt.config);
  } catch (const ConfigError& e) {
    throw nn::CheckpointError(std::string("checkpoint config is incompatible: ") + e.what());
  }
  const EnvConfig env = resolve_env(out.config, frame_width, frame_height);
  out.agent = build_agent(out.config, env);
  agents::restore_agent(ckpt, *out.agent);
  return out;
}

EvalResult evaluate(agents::Agent& agent, const VideoAnnotation& video, const EnvConfig& env_cfg,
                    std::uint64_t seed, int max_steps) {
  DrivingEnv env(video, env_cfg);
  const Chunk whole{&video, 0, 0, video.frame_count()};
  Rng init_rng(derive_seed(seed, Stream::kInit));
  Rng policy_rng(derive_seed(seed, Stream::kPolicy));
  EvalResult out;
  auto trace = [&](const Observation& before, const Action& action, const StepResult& r) {
    out.trace.push_back({before.frame, r.observation.x, action, r.reward, r.info.m_next});
  };
  const Episode ep = rollout(env, agent, whole, InitSpec{InitMode::kFixed}, ActMode::kExploit,
                             init_rng, policy_rng, max_steps, 1.0, trace);
  out.total_reward = ep.trajectory.total_reward();
  out.length = static_cast<int>(ep.trajectory.steps.size());
  out.done_reason = ep.done_reason;
  return out;
}

}  // namespace vdrive
