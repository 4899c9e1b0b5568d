#include "vdrive/agents/policy_agent.hpp"

#include <cmath>
#include <stdexcept>

namespace vdrive::agents {

PolicyAgent::PolicyAgent(AgentKind kind, ActionSpace space, PolicyAgentOptions options,
                         std::uint64_t weight_seed)
    : kind_(kind), space_(std::move(space)), options_(std::move(options)) {
  if (kind_ != AgentKind::kPgMa && kind_ != AgentKind::kPgSa && kind_ != AgentKind::kA2cMa &&
      kind_ != AgentKind::kA2cSa) {
    throw std::invalid_argument("PolicyAgent cannot implement " + std::string(to_string(kind_)));
  }
  build(weight_seed);
}

void PolicyAgent::build(std::uint64_t weight_seed) {
  Rng rng(weight_seed);
  encoder_ = nn::Encoder(options_.encoder);
  encoder_.init(rng);
  const std::size_t state = encoder_.output_size();
  if (multi_agent()) {
    speed_head_ = nn::MlpHead("speed", state, options_.hidden, space_.speed_count());
    angle_head_ = nn::MlpHead("angle", state, options_.hidden, space_.angle_count());
    speed_head_.init(rng);
    angle_head_.init(rng);
  } else {
    joint_head_ = nn::MlpHead("joint", state, options_.hidden, space_.joint_size());
    joint_head_.init(rng);
  }
  if (has_critic()) {
    critic_ = nn::MlpHead("critic", state, options_.hidden, 1);
    critic_.init(rng);
  }
}

nn::ParamList PolicyAgent::encoder_parameters() {
  nn::ParamList p;
  encoder_.collect(p);
  return p;
}

nn::ParamList PolicyAgent::speed_head_parameters() {
  nn::ParamList p;
  if (multi_agent()) speed_head_.collect(p);
  return p;
}

nn::ParamList PolicyAgent::angle_head_parameters() {
  nn::ParamList p;
  if (multi_agent()) angle_head_.collect(p);
  return p;
}

nn::ParamList PolicyAgent::joint_head_parameters() {
  nn::ParamList p;
  if (!multi_agent()) joint_head_.collect(p);
  return p;
}

nn::ParamList PolicyAgent::critic_parameters() {
  nn::ParamList p;
  if (has_critic()) critic_.collect(p);
  return p;
}

nn::ParamList PolicyAgent::parameters() {
  nn::ParamList p = encoder_parameters();
  for (auto* list : {&speed_head_, &angle_head_}) {
    if (multi_agent()) list->collect(p);
  }
  if (!multi_agent()) joint_head_.collect(p);
  if (has_critic()) critic_.collect(p);
  return p;
}

nn::StateVector PolicyAgent::encode(const Observation& obs) const {
  nn::Encoder::Tape tape;
  return encoder_.forward(obs, tape);
}

Action PolicyAgent::act(const Observation& obs, ActMode mode, Rng& rng) {
  const nn::StateVector state = encode(obs);
  nn::MlpHead::Tape tape;
  if (multi_agent()) {
    const nn::Categorical speed = nn::policy_forward(state, speed_head_, tape);
    const nn::Categorical angle = nn::policy_forward(state, angle_head_, tape);
    if (mode == ActMode::kExploit) {
      return space_.action(static_cast<int>(speed.argmax()), angle.argmax());
    }
    const auto f = static_cast<int>(speed.sample(rng));
    return space_.action(f, angle.sample(rng));
  }
  const nn::Categorical joint = nn::policy_forward(state, joint_head_, tape);
  return space_.joint_action(mode == ActMode::kExploit ? joint.argmax() : joint.sample(rng));
}

HeadLogProbs PolicyAgent::log_probs(const Observation& obs, const Action& action) const {
  const nn::StateVector state = encode(obs);
  nn::MlpHead::Tape tape;
  HeadLogProbs out;
  if (multi_agent()) {
    out.speed = nn::policy_forward(state, speed_head_, tape).log_prob(static_cast<std::size_t>(action.f));
    out.angle = nn::policy_forward(state, angle_head_, tape).log_prob(space_.angle_index(action.theta));
    out.joint = out.speed + out.angle;
  } else {
    out.joint = nn::policy_forward(state, joint_head_, tape).log_prob(space_.joint_index(action));
  }
  return out;
}

double PolicyAgent::value(const Observation& obs) const {
  if (!has_critic()) throw std::logic_error("agent has no critic");
  const nn::StateVector state = encode(obs);
  nn::MlpHead::Tape tape;
  return critic_.forward(state, tape)[0];
}

double PolicyAgent::weighted_log_prob(std::span<const WeightedAction> terms, bool accumulate,
                                      HeadSelect heads) {
  double total = 0.0;
  nn::Encoder::Tape enc_tape;
  nn::MlpHead::Tape head_tape;
  std::vector<double> grad_logits;
  for (const WeightedAction& term : terms) {
    if (term.weight == 0.0) continue;
    const nn::StateVector state = encoder_.forward(*term.observation, enc_tape);
    std::vector<double> grad_state(state.size(), 0.0);

    auto apply_head = [&](nn::MlpHead& head, std::size_t index) {
      const nn::Categorical dist = nn::policy_forward(state, head, head_tape);
      total += term.weight * dist.log_prob(index);
      if (!accumulate) return;
      grad_logits.assign(dist.size(), 0.0);
      dist.accumulate_log_prob_grad(index, term.weight, grad_logits);
      head.backward(head_tape, grad_logits, grad_state);
    };

    if (multi_agent()) {
      if (heads != HeadSelect::kAngleOnly) {
        apply_head(speed_head_, static_cast<std::size_t>(term.action.f));
      }
      if (heads != HeadSelect::kSpeedOnly) {
        apply_head(angle_head_, space_.angle_index(term.action.theta));
      }
    } else {
      apply_head(joint_head_, space_.joint_index(term.action));
    }
    if (accumulate) encoder_.backward(enc_tape, grad_state);
  }
  return total;
}

double PolicyAgent::critic_loss(std::span<const Observation* const> states,
                                std::span<const double> targets, bool accumulate,
                                double encoder_grad_scale) {
  if (!has_critic()) throw std::logic_error("agent has no critic");
  if (states.size() != targets.size()) throw std::invalid_argument("critic_loss: size mismatch");
  if (states.empty()) return 0.0;
  const double n = static_cast<double>(states.size());
  double total = 0.0;
  nn::Encoder::Tape enc_tape;
  nn::MlpHead::Tape head_tape;
  for (std::size_t t = 0; t < states.size(); ++t) {
    const nn::StateVector state = encoder_.forward(*states[t], enc_tape);
    const double v = critic_.forward(state, head_tape)[0];
    const double diff = v - targets[t];
    total += diff * diff;
    if (!accumulate) continue;
    const double grad_v = 2.0 * diff / n;
    std::vector<double> grad_state(state.size(), 0.0);
    critic_.backward(head_tape, std::span<const double>(&grad_v, 1), grad_state);
    for (double& g : grad_state) g *= encoder_grad_scale;
    encoder_.backward(enc_tape, grad_state);
  }
  return total / n;
}

std::vector<double> pg_advantages(std::span<const Trajectory> batch, double* baseline) {
  std::vector<double> all;
  for (const Trajectory& traj : batch) {
    const std::vector<double> g = discounted_returns(traj.rewards(), traj.gamma);
    all.insert(all.end(), g.begin(), g.end());
  }
  double b = 0.0;
  for (double g : all) b += g;
  if (!all.empty()) b /= static_cast<double>(all.size());
  for (double& g : all) g -= b;
  if (baseline != nullptr) *baseline = b;
  return all;
}

namespace {

std::vector<WeightedAction> weighted_terms(std::span<const Trajectory> batch,
                                           std::span<const double> weights) {
  std::vector<WeightedAction> terms;
  terms.reserve(weights.size());
  std::size_t k = 0;
  for (const Trajectory& traj : batch) {
    for (const TrajectoryStep& step : traj.steps) {
      terms.push_back({&step.observation, step.action, weights[k++]});
    }
  }
  return terms;
}

}  // namespace

double pg_surrogate(PolicyAgent& agent, std::span<const Trajectory> batch, bool accumulate,
                    HeadSelect heads) {
  const std::vector<double> adv = pg_advantages(batch);
  const std::vector<WeightedAction> terms = weighted_terms(batch, adv);
  return agent.weighted_log_prob(terms, accumulate, heads);
}

PgUpdateStats pg_update(PolicyAgent& agent, std::span<const Trajectory> batch, double lr) {
  if (batch.empty()) throw std::invalid_argument("pg_update needs at least one trajectory");
  PgUpdateStats stats;
  const std::vector<double> adv = pg_advantages(batch, &stats.baseline);
  const std::vector<WeightedAction> terms = weighted_terms(batch, adv);
  stats.steps = terms.size();

  nn::ParamList params = agent.parameters();
  nn::zero_grads(params);
  stats.surrogate = agent.weighted_log_prob(terms, true);
  if (!std::isfinite(stats.surrogate)) throw nn::NumericError("policy-gradient surrogate is not finite");
  nn::check_finite(params);
  nn::sgd_update(params, lr, nn::Direction::kAscent);
  return stats;
}

A2cTargets a2c_targets(const PolicyAgent& agent, const Trajectory& trajectory) {
  A2cTargets out;
  const std::size_t n = trajectory.steps.size();
  out.values.reserve(n);
  for (const TrajectoryStep& s : trajectory.steps) out.values.push_back(agent.value(s.observation));
  const bool need_tail = n > 0 && !trajectory.steps.back().done;
  const double tail = need_tail ? agent.value(trajectory.final_observation) : 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const TrajectoryStep& s = trajectory.steps[t];
    const double next_value = t + 1 < n ? out.values[t + 1] : tail;
    const double target = s.reward + (s.done ? 0.0 : trajectory.gamma * next_value);
    out.targets.push_back(target);
    out.advantages.push_back(target - out.values[t]);
  }
  return out;
}

double a2c_actor_surrogate(PolicyAgent& agent, const Trajectory& trajectory,
                           std::span<const double> advantages, bool accumulate, HeadSelect heads) {
  const std::vector<WeightedAction> terms =
      weighted_terms(std::span<const Trajectory>(&trajectory, 1), advantages);
  return agent.weighted_log_prob(terms, accumulate, heads);
}

double a2c_critic_loss(PolicyAgent& agent, const Trajectory& trajectory,
                       std::span<const double> targets, bool accumulate) {
  std::vector<const Observation*> states;
  for (const TrajectoryStep& s : trajectory.steps) states.push_back(&s.observation);
  return agent.critic_loss(states, targets, accumulate);
}

A2cUpdateStats a2c_update(PolicyAgent& agent, const Trajectory& trajectory, double lr_actor,
                          double lr_critic) {
  if (!agent.has_critic()) throw std::invalid_argument("a2c_update needs an A2C agent");
  if (!(lr_actor > 0.0) || lr_critic < 0.0) throw std::invalid_argument("a2c_update: bad learning rates");
  A2cUpdateStats stats;
  stats.steps = trajectory.steps.size();
  if (trajectory.steps.empty()) return stats;

  const A2cTargets tg = a2c_targets(agent, trajectory);
  nn::ParamList all = agent.parameters();
  nn::zero_grads(all);
  stats.actor_surrogate = a2c_actor_surrogate(agent, trajectory, tg.advantages, true);

  // The encoder ascends lr_actor·(∇J − (lr_critic/lr_actor)·∇L).
  std::vector<const Observation*> states;
  for (const TrajectoryStep& s : trajectory.steps) states.push_back(&s.observation);
  stats.critic_loss = agent.critic_loss(states, tg.targets, true, -lr_critic / lr_actor);
  if (!std::isfinite(stats.actor_surrogate) || !std::isfinite(stats.critic_loss)) {
    throw nn::NumericError("actor-critic objective is not finite");
  }
  nn::check_finite(all);

  nn::ParamList ascend = agent.encoder_parameters();
  for (nn::ParamBlock* b : agent.speed_head_parameters()) ascend.push_back(b);
  for (nn::ParamBlock* b : agent.angle_head_parameters()) ascend.push_back(b);
  for (nn::ParamBlock* b : agent.joint_head_parameters()) ascend.push_back(b);
  nn::sgd_update(ascend, lr_actor, nn::Direction::kAscent);
  nn::sgd_update(agent.critic_parameters(), lr_critic, nn::Direction::kDescent);
  return stats;
}

}  // namespace vdrive::agents
