#include "vdrive/verification.hpp"

#include <functional>
#include <memory>

#include "vdrive/agents/dqn_agent.hpp"
#include "vdrive/agents/policy_agent.hpp"
#include "vdrive/nn/categorical.hpp"
#include "vdrive/nn/layers.hpp"

namespace vdrive {

namespace {

using nn::ParamBlock;
using nn::ParamList;

std::vector<double> random_vector(std::size_t n, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

ParamBlock input_block(std::size_t n, Rng& rng) {
  ParamBlock b("input", {n});
  b.values = random_vector(n, rng);
  return b;
}

double project(std::span<const double> y, std::span<const double> r) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * r[i];
  return s;
}

struct Runner {
  std::vector<GradCheckCase>& out;
  std::uint64_t seed;

  void operator()(const std::string& name, const nn::Objective& objective, const ParamList& params) {
    out.push_back({name, seed, nn::grad_check(objective, params, kGradCheckSteps)});
  }
};

void check_layers(Runner& run, Rng& rng) {
  {
    nn::Dense dense("dense", 5, 4);
    dense.init(rng);
    ParamBlock x = input_block(5, rng);
    const auto r = random_vector(4, rng);
    run("dense",
        [&](bool acc) {
          std::vector<double> y(4);
          dense.forward(x.values, y);
          if (acc) dense.backward(x.values, r, x.grads);
          return project(y, r);
        },
        {&dense.weight, &dense.bias, &x});
  }
  {
    const nn::Shape3 in{2, 5, 6};
    nn::Conv2d conv("conv", in, 3, 3);
    conv.init(rng);
    ParamBlock x = input_block(in.size(), rng);
    const auto r = random_vector(conv.output_shape().size(), rng);
    run("conv2d",
        [&](bool acc) {
          std::vector<double> y(conv.output_shape().size());
          conv.forward(x.values, y);
          if (acc) conv.backward(x.values, r, x.grads);
          return project(y, r);
        },
        {&conv.weight, &conv.bias, &x});
  }
  {
    const nn::Shape3 in{2, 4, 6};
    nn::MaxPool2d pool(in);
    ParamBlock x = input_block(in.size(), rng);
    const auto r = random_vector(pool.output_shape().size(), rng);
    run("relu_maxpool",
        [&](bool acc) {
          std::vector<double> a = x.values;
          nn::relu_inplace(a);
          std::vector<double> y(pool.output_shape().size());
          std::vector<std::size_t> arg(y.size());
          pool.forward(a, y, arg);
          if (acc) {
            std::vector<double> g(a.size(), 0.0);
            pool.backward(arg, r, g);
            nn::relu_backward(a, g);
            for (std::size_t i = 0; i < g.size(); ++i) x.grads[i] += g[i];
          }
          return project(y, r);
        },
        {&x});
  }
  {
    ParamBlock x = input_block(7, rng);
    const auto r = random_vector(7, rng);
    run("tanh",
        [&](bool acc) {
          std::vector<double> y = x.values;
          nn::tanh_inplace(y);
          if (acc) {
            std::vector<double> g = r;
            nn::tanh_backward(y, g);
            for (std::size_t i = 0; i < g.size(); ++i) x.grads[i] += g[i];
          }
          return project(y, r);
        },
        {&x});
  }
  {
    nn::ScalarAttention attn(4, 3);
    attn.init(rng);
    ParamBlock x = input_block(nn::kScalarFeatures, rng);
    nn::ScalarFeatures r{};
    for (double& v : r) v = rng.uniform(-1.0, 1.0);
    run("attention",
        [&](bool acc) {
          nn::ScalarFeatures s{};
          std::copy(x.values.begin(), x.values.end(), s.begin());
          nn::ScalarAttention::Tape tape;
          const nn::ScalarFeatures w = attn.forward(s, tape);
          if (acc) {
            const nn::ScalarFeatures g = attn.backward(tape, r);
            for (std::size_t i = 0; i < g.size(); ++i) x.grads[i] += g[i];
          }
          return project(w, r);
        },
        [&] {
          ParamList p;
          attn.collect(p);
          p.push_back(&x);
          return p;
        }());
  }
}

void check_encoder_and_heads(Runner& run, Rng& rng, const EnvConfig& env) {
  const nn::EncoderSpec spec = tiny_encoder_spec();
  nn::Encoder encoder(spec);
  encoder.init(rng);
  const Observation obs = random_observation(spec, env, rng);
  const auto r = random_vector(spec.output_size(), rng);
  ParamList enc_params;
  encoder.collect(enc_params);
  run("encoder",
      [&](bool acc) {
        nn::Encoder::Tape tape;
        const nn::StateVector s = encoder.forward(obs, tape);
        if (acc) encoder.backward(tape, r);
        return project(s, r);
      },
      enc_params);

  nn::MlpHead head("head", spec.output_size(), 5, 6);
  head.init(rng);
  ParamBlock state = input_block(spec.output_size(), rng);
  const std::size_t k = rng.index(6);
  ParamList head_params;
  head.collect(head_params);
  head_params.push_back(&state);
  run("mlp_log_softmax",
      [&](bool acc) {
        nn::MlpHead::Tape tape;
        const nn::Categorical dist = nn::policy_forward(state.values, head, tape);
        if (acc) {
          std::vector<double> g(dist.size(), 0.0);
          dist.accumulate_log_prob_grad(k, 1.0, g);
          head.backward(tape, g, state.grads);
        }
        return dist.log_prob(k);
      },
      head_params);
}

agents::Trajectory random_trajectory(const agents::ActionSpace& space, const nn::EncoderSpec& spec,
                                     const EnvConfig& env, Rng& rng, int steps, bool terminal) {
  agents::Trajectory traj;
  for (int t = 0; t < steps; ++t) {
    const Observation obs = random_observation(spec, env, rng);
    const Action a = space.joint_action(rng.index(space.joint_size()));
    traj.steps.push_back({obs, a, rng.uniform(-1.0, 1.0), terminal && t + 1 == steps});
  }
  traj.final_observation = random_observation(spec, env, rng);
  return traj;
}

void check_agents(Runner& run, Rng& rng, const EnvConfig& env) {
  using agents::AgentKind;
  using agents::HeadSelect;
  const nn::EncoderSpec spec = tiny_encoder_spec();
  const agents::ActionSpace space = agents::ActionSpace::from(env);
  const agents::PolicyAgentOptions opts{spec, 6};

  for (AgentKind kind : {AgentKind::kPgMa, AgentKind::kPgSa}) {
    agents::PolicyAgent agent(kind, space, opts, rng.next());
    std::vector<agents::Trajectory> batch;
    for (int i = 0; i < 2; ++i) batch.push_back(random_trajectory(space, spec, env, rng, 3, true));
    const std::string base = std::string(agents::to_string(kind));
    if (kind == AgentKind::kPgMa) {
      run(base + "_speed_actor",
          [&](bool acc) { return agents::pg_surrogate(agent, batch, acc, HeadSelect::kSpeedOnly); },
          agent.parameters());
      run(base + "_angle_actor",
          [&](bool acc) { return agents::pg_surrogate(agent, batch, acc, HeadSelect::kAngleOnly); },
          agent.parameters());
    }
    run(base + "_surrogate", [&](bool acc) { return agents::pg_surrogate(agent, batch, acc); },
        agent.parameters());
  }

  for (AgentKind kind : {AgentKind::kA2cMa, AgentKind::kA2cSa}) {
    agents::PolicyAgent agent(kind, space, opts, rng.next());
    const agents::Trajectory traj = random_trajectory(space, spec, env, rng, 3, false);
    const agents::A2cTargets tg = agents::a2c_targets(agent, traj);
    const std::string base = std::string(agents::to_string(kind));
    run(base + "_actor",
        [&](bool acc) { return agents::a2c_actor_surrogate(agent, traj, tg.advantages, acc); },
        agent.parameters());
    run(base + "_critic",
        [&](bool acc) { return agents::a2c_critic_loss(agent, traj, tg.targets, acc); },
        agent.parameters());
  }

  {
    agents::DqnOptions dqn_opts;
    dqn_opts.encoder = spec;
    dqn_opts.hidden = 6;
    dqn_opts.batch = 4;
    agents::DuelingDqnAgent agent(space, dqn_opts, rng.next(), rng.next());
    // Perturb the online copy so the targets come from a different network.
    for (ParamBlock* b : agent.parameters()) {
      for (double& v : b->values) v += rng.uniform(-0.05, 0.05);
    }
    std::vector<agents::Transition> items;
    for (int i = 0; i < 4; ++i) {
      items.push_back({random_observation(spec, env, rng), space.joint_action(rng.index(space.joint_size())),
                       rng.uniform(-1.0, 1.0), random_observation(spec, env, rng), i == 3, 0});
    }
    std::vector<const agents::Transition*> batch;
    for (const auto& t : items) batch.push_back(&t);
    const std::vector<double> y = agents::dqn_targets(agent, batch, 0.99);
    run("DUELING_DQN_loss", [&](bool acc) { return agents::dqn_loss(agent, batch, y, acc); },
        agent.parameters());
  }
}

}  // namespace

nn::EncoderSpec tiny_encoder_spec() {
  nn::EncoderSpec spec;
  spec.input_rows = 8;
  spec.input_cols = 8;
  spec.conv_channels = {2, 3};
  spec.kernel = 3;
  spec.dense_out = 4;
  spec.embed_size = 3;
  spec.attn_size = 3;
  return spec;
}

Observation random_observation(const nn::EncoderSpec& spec, const EnvConfig& env, Rng& rng) {
  Observation obs;
  obs.channel_rows = static_cast<int>(spec.input_rows);
  obs.channel_cols = static_cast<int>(spec.input_cols);
  obs.channels = std::make_shared<const std::vector<double>>(
      random_vector(spec.input_channels * spec.input_rows * spec.input_cols, rng, 0.0, 1.0));
  const double w = env.frame_width;
  obs.l_lane = rng.uniform(0.1, 0.4) * w;
  obs.r_lane = rng.uniform(0.6, 0.9) * w;
  obs.x = rng.uniform(obs.l_lane, obs.r_lane);
  obs.f = static_cast<double>(rng.index(static_cast<std::size_t>(env.f_max) + 1));
  obs.theta = rng.uniform(10.0, 170.0);
  obs.theta_lane = rng.uniform(60.0, 120.0);
  obs.lane_center = 0.5 * (obs.l_lane + obs.r_lane);
  return obs;
}

std::vector<GradCheckCase> run_gradcheck_suite(int seeds, std::uint64_t base_seed) {
  std::vector<GradCheckCase> out;
  const EnvConfig env;
  for (int s = 0; s < seeds; ++s) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(s);
    Rng rng(seed);
    Runner run{out, seed};
    check_layers(run, rng);
    check_encoder_and_heads(run, rng, env);
    check_agents(run, rng, env);
  }
  return out;
}

}  // namespace vdrive
