#pragma once

// Policy-gradient learners. Multi-agent (MA) kinds own a speed actor and an
// angle actor on a shared encoder; single-agent (SA) kinds own one head over
// the joint (f, θ) grid. A2C kinds add a value head on the same encoder.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "vdrive/agents/agent.hpp"
#include "vdrive/nn/categorical.hpp"
#include "vdrive/nn/encoder.hpp"

namespace vdrive::agents {

struct PolicyAgentOptions {
  nn::EncoderSpec encoder;
  std::size_t hidden = 32;
};

enum class HeadSelect { kBoth, kSpeedOnly, kAngleOnly };

struct HeadLogProbs {
  double speed = 0.0;  // MA only
  double angle = 0.0;  // MA only
  double joint = 0.0;  // log π(f, θ | S)
};

/// One term Σ weight·log π(action | observation) of a surrogate objective.
struct WeightedAction {
  const Observation* observation = nullptr;
  Action action;
  double weight = 0.0;
};

class PolicyAgent : public Agent {
 public:
  /// kind must be one of PG_MA, PG_SA, A2C_MA, A2C_SA.
  PolicyAgent(AgentKind kind, ActionSpace space, PolicyAgentOptions options,
              std::uint64_t weight_seed);

  PolicyAgent(const PolicyAgent&) = default;

  AgentKind kind() const override { return kind_; }
  const ActionSpace& action_space() const override { return space_; }
  /// Explore samples each head; exploit takes each head's argmax.
  Action act(const Observation& obs, ActMode mode, Rng& rng) override;
  nn::ParamList parameters() override;

  bool multi_agent() const { return kind_ == AgentKind::kPgMa || kind_ == AgentKind::kA2cMa; }
  bool has_critic() const { return kind_ == AgentKind::kA2cMa || kind_ == AgentKind::kA2cSa; }

  nn::ParamList encoder_parameters();
  nn::ParamList speed_head_parameters();  // φ1 (MA)
  nn::ParamList angle_head_parameters();  // φ2 (MA)
  nn::ParamList joint_head_parameters();  // SA
  nn::ParamList critic_parameters();

  HeadLogProbs log_probs(const Observation& obs, const Action& action) const;
  double value(const Observation& obs) const;
  nn::StateVector encode(const Observation& obs) const;
  const PolicyAgentOptions& options() const { return options_; }

  /// Σ weight·log π over the terms, restricted to the selected heads for MA
  /// kinds. When accumulate is set, gradients flow into the heads and, summed
  /// across heads, into the shared encoder.
  double weighted_log_prob(std::span<const WeightedAction> terms, bool accumulate,
                           HeadSelect heads = HeadSelect::kBoth);

  /// mean_t (V(S_t) − y_t)². encoder_grad_scale multiplies the gradient
  /// entering the encoder; the critic head receives the plain gradient.
  double critic_loss(std::span<const Observation* const> states, std::span<const double> targets,
                     bool accumulate, double encoder_grad_scale = 1.0);

 private:
  void build(std::uint64_t weight_seed);

  AgentKind kind_;
  ActionSpace space_;
  PolicyAgentOptions options_;
  nn::Encoder encoder_;
  nn::MlpHead speed_head_;
  nn::MlpHead angle_head_;
  nn::MlpHead joint_head_;
  nn::MlpHead critic_;
};

struct PgUpdateStats {
  double baseline = 0.0;
  double surrogate = 0.0;
  std::size_t steps = 0;
};

/// Per-step weights G_t − b with b the mean of every G_t in the batch.
std::vector<double> pg_advantages(std::span<const Trajectory> batch, double* baseline = nullptr);

/// Σ_τ Σ_t log π(a_t|S_t)·(G_t − b); gradients accumulate when requested.
double pg_surrogate(PolicyAgent& agent, std::span<const Trajectory> batch, bool accumulate,
                    HeadSelect heads = HeadSelect::kBoth);

/// One gradient-ascent step on the batch surrogate. Throws on an empty batch.
PgUpdateStats pg_update(PolicyAgent& agent, std::span<const Trajectory> batch, double lr);

struct A2cTargets {
  std::vector<double> advantages;  // r + γ·V(S′)·(1−done) − V(S)
  std::vector<double> targets;     // r + γ·V(S′)·(1−done)
  std::vector<double> values;      // V(S)
};

A2cTargets a2c_targets(const PolicyAgent& agent, const Trajectory& trajectory);

/// Σ_t log π(a_t|S_t)·Â_t with Â held constant.
double a2c_actor_surrogate(PolicyAgent& agent, const Trajectory& trajectory,
                           std::span<const double> advantages, bool accumulate,
                           HeadSelect heads = HeadSelect::kBoth);

/// mean_t (V(S_t) − y_t)² with y held constant.
double a2c_critic_loss(PolicyAgent& agent, const Trajectory& trajectory,
                       std::span<const double> targets, bool accumulate);

struct A2cUpdateStats {
  double actor_surrogate = 0.0;
  double critic_loss = 0.0;
  std::size_t steps = 0;
};

/// Actors ascend with lr_actor, the critic descends with lr_critic; the
/// shared encoder takes both steps.
A2cUpdateStats a2c_update(PolicyAgent& agent, const Trajectory& trajectory, double lr_actor,
                          double lr_critic);

}  // namespace vdrive::agents
