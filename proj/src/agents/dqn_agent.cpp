#include "vdrive/agents/dqn_agent.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vdrive::agents {

std::vector<double> dueling_aggregate(double value, std::span<const double> advantage) {
  double mean = 0.0;
  for (double a : advantage) mean += a;
  if (!advantage.empty()) mean /= static_cast<double>(advantage.size());
  std::vector<double> q(advantage.size());
  for (std::size_t k = 0; k < q.size(); ++k) q[k] = value + (advantage[k] - mean);
  return q;
}

DuelingQNetwork::DuelingQNetwork(const nn::EncoderSpec& spec, std::size_t hidden,
                                 std::size_t actions)
    : encoder_(spec),
      hidden_("q.hidden", spec.output_size(), hidden),
      value_("q.value", hidden, 1),
      advantage_("q.advantage", hidden, actions) {}

void DuelingQNetwork::init(Rng& rng) {
  encoder_.init(rng);
  hidden_.init(rng);
  value_.init(rng);
  advantage_.init(rng);
}

const std::vector<double>& DuelingQNetwork::forward(const Observation& obs, Tape& tape) const {
  tape.state = encoder_.forward(obs, tape.encoder);
  tape.hidden.assign(hidden_.out_size(), 0.0);
  hidden_.forward(tape.state, tape.hidden);
  nn::tanh_inplace(tape.hidden);
  value_.forward(tape.hidden, std::span<double>(&tape.value, 1));
  tape.advantage.assign(advantage_.out_size(), 0.0);
  advantage_.forward(tape.hidden, tape.advantage);
  tape.q = dueling_aggregate(tape.value, tape.advantage);
  return tape.q;
}

void DuelingQNetwork::backward(const Tape& tape, std::span<const double> grad_q) {
  // ∂Q_k/∂V = 1 and ∂Q_k/∂A_j = [k = j] − 1/K.
  double grad_v = 0.0;
  for (double g : grad_q) grad_v += g;
  const double mean_g = grad_v / static_cast<double>(grad_q.size());
  std::vector<double> grad_a(grad_q.size());
  for (std::size_t j = 0; j < grad_a.size(); ++j) grad_a[j] = grad_q[j] - mean_g;

  std::vector<double> grad_hidden(tape.hidden.size(), 0.0);
  value_.backward(tape.hidden, std::span<const double>(&grad_v, 1), grad_hidden);
  advantage_.backward(tape.hidden, grad_a, grad_hidden);
  nn::tanh_backward(tape.hidden, grad_hidden);
  std::vector<double> grad_state(tape.state.size(), 0.0);
  hidden_.backward(tape.state, grad_hidden, grad_state);
  encoder_.backward(tape.encoder, grad_state);
}

void DuelingQNetwork::collect(nn::ParamList& params) {
  encoder_.collect(params);
  hidden_.collect(params);
  value_.collect(params);
  advantage_.collect(params);
}

double annealed_epsilon(double progress, const DqnOptions& options) {
  if (options.anneal_fraction <= 0.0) return options.epsilon_end;
  const double t = std::clamp(progress / options.anneal_fraction, 0.0, 1.0);
  return options.epsilon_start + t * (options.epsilon_end - options.epsilon_start);
}

DuelingDqnAgent::DuelingDqnAgent(ActionSpace space, DqnOptions options, std::uint64_t weight_seed,
                                 std::uint64_t exploration_seed)
    : space_(std::move(space)),
      options_(std::move(options)),
      online_(options_.encoder, options_.hidden, space_.joint_size()),
      target_(options_.encoder, options_.hidden, space_.joint_size()),
      exploration_rng_(exploration_seed),
      epsilon_(options_.epsilon_start) {
  if (options_.batch == 0) throw std::invalid_argument("DQN batch must be positive");
  if (options_.target_sync == 0) throw std::invalid_argument("DQN target_sync must be positive");
  Rng rng(weight_seed);
  online_.init(rng);
  sync_target();
}

nn::ParamList DuelingDqnAgent::parameters() {
  nn::ParamList p;
  online_.collect(p);
  return p;
}

nn::ParamList DuelingDqnAgent::target_parameters() {
  nn::ParamList p;
  target_.collect(p);
  return p;
}

void DuelingDqnAgent::sync_target() {
  const nn::ParamList src = parameters();
  const nn::ParamList dst = target_parameters();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i]->values = src[i]->values;
}

void DuelingDqnAgent::set_epsilon(double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1]");
  epsilon_ = epsilon;
}

std::vector<double> DuelingDqnAgent::q_values(const Observation& obs) const {
  DuelingQNetwork::Tape tape;
  return online_.forward(obs, tape);
}

std::vector<double> DuelingDqnAgent::target_q_values(const Observation& obs) const {
  DuelingQNetwork::Tape tape;
  return target_.forward(obs, tape);
}

Action DuelingDqnAgent::act(const Observation& obs, ActMode mode, Rng& rng) {
  if (mode == ActMode::kExplore && exploration_rng_.uniform() < epsilon_) {
    return space_.joint_action(rng.index(space_.joint_size()));
  }
  const std::vector<double> q = q_values(obs);
  const auto best = std::max_element(q.begin(), q.end()) - q.begin();
  return space_.joint_action(static_cast<std::size_t>(best));
}

std::vector<double> dqn_targets(const DuelingDqnAgent& agent,
                                std::span<const Transition* const> batch, double gamma) {
  std::vector<double> y;
  y.reserve(batch.size());
  for (const Transition* t : batch) {
    double bootstrap = 0.0;
    if (!t->done && gamma != 0.0) {
      const std::vector<double> q = agent.target_q_values(t->next_state);
      bootstrap = gamma * *std::max_element(q.begin(), q.end());
    }
    y.push_back(t->reward + bootstrap);
  }
  return y;
}

double dqn_loss(DuelingDqnAgent& agent, std::span<const Transition* const> batch,
                std::span<const double> targets, bool accumulate) {
  if (batch.size() != targets.size()) throw std::invalid_argument("dqn_loss: size mismatch");
  if (batch.empty()) return 0.0;
  const double n = static_cast<double>(batch.size());
  const ActionSpace& space = agent.action_space();
  DuelingQNetwork::Tape tape;
  std::vector<double> grad_q;
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const std::vector<double>& q = agent.online().forward(batch[i]->state, tape);
    const std::size_t a = space.joint_index(batch[i]->action);
    const double diff = q[a] - targets[i];
    total += diff * diff;
    if (!accumulate) continue;
    grad_q.assign(q.size(), 0.0);
    grad_q[a] = 2.0 * diff / n;
    agent.online().backward(tape, grad_q);
  }
  return total / n;
}

std::optional<DqnUpdateStats> dqn_update(DuelingDqnAgent& agent, const ReplayBuffer& buffer,
                                         Rng& replay_rng, double lr, double gamma) {
  const std::size_t batch_size = agent.options().batch;
  if (buffer.size() < batch_size) return std::nullopt;
  const std::vector<const Transition*> batch = buffer.sample(batch_size, replay_rng);
  const std::vector<double> y = dqn_targets(agent, batch, gamma);

  nn::ParamList params = agent.parameters();
  nn::zero_grads(params);
  DqnUpdateStats stats;
  stats.batch = batch.size();
  stats.loss = dqn_loss(agent, batch, y, true);
  if (!std::isfinite(stats.loss)) throw nn::NumericError("DQN loss is not finite");
  nn::check_finite(params);
  nn::sgd_update(params, lr, nn::Direction::kDescent);

  agent.count_update();
  if (agent.updates() % agent.options().target_sync == 0) {
    agent.sync_target();
    stats.target_synced = true;
  }
  return stats;
}

}  // namespace vdrive::agents
