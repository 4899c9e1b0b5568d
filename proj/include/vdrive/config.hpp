#pragma once

// Training configuration as plain-text key=value lines. Blank lines and
// lines starting with '#' are ignored. Keys:
//
//   agent              PG_MA | PG_SA | A2C_MA | A2C_SA | DUELING_DQN | RANDOM | INTELLIGENT
//   episodes           1..1500
//   gamma              [0, 1]
//   lr                 actor (or Q-network) learning rate
//   lr_critic          A2C critic learning rate
//   batch_size         1, 3 or 5 episodes per PG update
//   window, stride     chunk length and step in frames
//   train_fraction     share of chunks used for training, (0, 1)
//   rolling_n          rolling-mean window of the metrics
//   max_episode_steps  horizon cap per training episode
//   seed               master seed
//   hidden             width of every head's hidden layer
//   env.<field>        f_max angle_min angle_max angle_step intersection_threshold
//                      collision_threshold rest_timeout alpha beta delta mu nu
//   encoder.<field>    input_rows input_cols conv_channels (comma list) kernel
//                      dense_out embed_size attn_size
//   dqn.<field>        replay_capacity batch target_sync epsilon_start epsilon_end
//                      anneal_fraction

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>

#include "vdrive/agents/agent.hpp"
#include "vdrive/env.hpp"
#include "vdrive/nn/encoder.hpp"

namespace vdrive {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct TrainConfig {
  agents::AgentKind agent = agents::AgentKind::kPgMa;
  int episodes = 300;
  double gamma = 0.99;
  double lr = 5e-6;
  double lr_critic = 5e-6;
  int batch_size = 1;
  int window = 100;
  int stride = 25;
  double train_fraction = 0.5;
  int rolling_n = 50;
  int max_episode_steps = 1000;
  std::uint64_t seed = 1;
  std::size_t hidden = 32;
  // Frame geometry (width, agent box) is taken from the video at run time;
  // only the action grid, thresholds and reward coefficients apply here.
  EnvConfig env;
  nn::EncoderSpec encoder;
  std::size_t replay_capacity = 5000;
  std::size_t dqn_batch = 128;
  std::size_t target_sync = 500;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double anneal_fraction = 0.5;

  /// Throws ConfigError naming the offending key.
  void validate() const;
  std::map<std::string, std::string> to_map() const;
};

/// Applies entries on top of the defaults; unknown keys and malformed values
/// throw ConfigError. The result is validated.
TrainConfig config_from_map(const std::map<std::string, std::string>& entries);
TrainConfig parse_config(const std::string& text);
TrainConfig load_config(const std::filesystem::path& path);
std::string format_config(const TrainConfig& config);

/// Env config for a video: geometry from the frame size, everything else from
/// the training config, observation resolution from the encoder input.
EnvConfig resolve_env(const TrainConfig& config, int frame_width, int frame_height);
nn::EncoderSpec resolve_encoder(const TrainConfig& config, const EnvConfig& env);

}  // namespace vdrive
