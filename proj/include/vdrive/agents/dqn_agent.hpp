#pragma once

// Dueling Q-learning over the joint (f, θ) grid with a target network and
// ε-greedy exploration.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "vdrive/agents/agent.hpp"
#include "vdrive/agents/replay_buffer.hpp"
#include "vdrive/nn/encoder.hpp"

namespace vdrive::agents {

/// Q = V + A − mean(A).
std::vector<double> dueling_aggregate(double value, std::span<const double> advantage);

/// Encoder → tanh hidden layer → value stream V (1) and advantage stream A (K).
class DuelingQNetwork {
 public:
  struct Tape {
    nn::Encoder::Tape encoder;
    nn::StateVector state;
    std::vector<double> hidden;
    double value = 0.0;
    std::vector<double> advantage;
    std::vector<double> q;
  };

  DuelingQNetwork() = default;
  DuelingQNetwork(const nn::EncoderSpec& spec, std::size_t hidden, std::size_t actions);

  void init(Rng& rng);
  std::size_t action_count() const { return advantage_.out_size(); }

  const std::vector<double>& forward(const Observation& obs, Tape& tape) const;
  void backward(const Tape& tape, std::span<const double> grad_q);
  void collect(nn::ParamList& params);

 private:
  nn::Encoder encoder_;
  nn::Dense hidden_;
  nn::Dense value_;
  nn::Dense advantage_;
};

struct DqnOptions {
  nn::EncoderSpec encoder;
  std::size_t hidden = 32;
  std::size_t batch = 128;
  std::size_t target_sync = 500;  // updates between target copies
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double anneal_fraction = 0.5;   // of the training run
};

/// Linear ε schedule: start → end over the first anneal_fraction of progress
/// (progress in [0, 1]), flat afterwards.
double annealed_epsilon(double progress, const DqnOptions& options);

class DuelingDqnAgent : public Agent {
 public:
  /// exploration_seed drives the ε coin, kept apart from the action draws.
  DuelingDqnAgent(ActionSpace space, DqnOptions options, std::uint64_t weight_seed,
                  std::uint64_t exploration_seed);

  AgentKind kind() const override { return AgentKind::kDuelingDqn; }
  const ActionSpace& action_space() const override { return space_; }
  /// Explore is ε-greedy (uniform joint action with probability ε); exploit
  /// is greedy. Greedy ties resolve to the lowest joint index.
  Action act(const Observation& obs, ActMode mode, Rng& rng) override;
  nn::ParamList parameters() override;  // online network only

  nn::ParamList target_parameters();
  void sync_target();

  double epsilon() const { return epsilon_; }
  void set_epsilon(double epsilon);

  std::vector<double> q_values(const Observation& obs) const;
  std::vector<double> target_q_values(const Observation& obs) const;

  const DqnOptions& options() const { return options_; }
  std::size_t updates() const { return updates_; }
  void count_update() { ++updates_; }

  DuelingQNetwork& online() { return online_; }

 private:
  ActionSpace space_;
  DqnOptions options_;
  DuelingQNetwork online_;
  DuelingQNetwork target_;
  Rng exploration_rng_;
  double epsilon_;
  std::size_t updates_ = 0;
};

/// y = r + γ·max_a′ Q_target(S′, a′)·(1 − done).
std::vector<double> dqn_targets(const DuelingDqnAgent& agent,
                                std::span<const Transition* const> batch, double gamma);

/// mean (Q(S, a) − y)² with y held constant.
double dqn_loss(DuelingDqnAgent& agent, std::span<const Transition* const> batch,
                std::span<const double> targets, bool accumulate);

struct DqnUpdateStats {
  double loss = 0.0;
  std::size_t batch = 0;
  bool target_synced = false;
};

/// Samples a batch and takes one descent step. Returns nullopt without
/// touching anything when the buffer holds fewer than a batch.
std::optional<DqnUpdateStats> dqn_update(DuelingDqnAgent& agent, const ReplayBuffer& buffer,
                                         Rng& replay_rng, double lr, double gamma);

}  // namespace vdrive::agents
