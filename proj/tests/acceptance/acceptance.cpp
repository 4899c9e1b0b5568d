// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "vdrive/agents/dqn_agent.hpp"
#include "vdrive/agents/policy_agent.hpp"
#include "vdrive/agents/replay_buffer.hpp"
#include "vdrive/geometry.hpp"
#include "vdrive/trainer.hpp"
#include "vdrive/verification.hpp"

using namespace vdrive;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

EnvConfig tiny_env() {
  EnvConfig e = EnvConfig::for_frame(224, 224);
  e.obs_rows = e.obs_cols = 8;
  return e;
}

// 1 ------------------------------------------------------------------------

Verdict gradients() {
  const auto t0 = Clock::now();
  const auto cases = run_gradcheck_suite(10);
  const double secs = seconds_since(t0);
  double worst = 0.0;
  std::string worst_name;
  for (const auto& c : cases) {
    if (c.report.max_rel_error > worst) {
      worst = c.report.max_rel_error;
      worst_name = c.name + " seed " + std::to_string(c.seed);
    }
  }
  return {worst < kGradCheckTolerance && secs < 60.0 && cases.size() >= 160,
          fmt("%zu cases over 10 seeds, max rel error %.2e (%s), %.1f s", cases.size(), worst,
              worst_name.c_str(), secs)};
}

// 2 ------------------------------------------------------------------------

Verdict factorization() {
  const EnvConfig env = tiny_env();
  const nn::EncoderSpec spec = tiny_encoder_spec();
  const agents::ActionSpace space = agents::ActionSpace::from(env);
  Rng rng(derive_seed(2, Stream::kPolicy));
  double worst = 0.0;
  int samples = 0;
  for (int a = 0; a < 100; ++a) {
    const auto kind = a % 2 == 0 ? agents::AgentKind::kPgMa : agents::AgentKind::kA2cMa;
    agents::PolicyAgent agent(kind, space, {spec, 8}, 1000 + static_cast<std::uint64_t>(a));
    for (int i = 0; i < 100; ++i, ++samples) {
      const Observation obs = random_observation(spec, env, rng);
      const Action act = space.action(static_cast<int>(rng.index(space.speed_count())),
                                      rng.index(space.angle_count()));
      const auto lp = agent.log_probs(obs, act);
      worst = std::max(worst, std::abs(lp.joint - (lp.speed + lp.angle)));
    }
  }
  return {worst <= 1e-12, fmt("%d state/action samples, max |joint - speed - angle| %.2e", samples, worst)};
}

// 3 ------------------------------------------------------------------------

// sin(a + b)/sin a expanded as cos b + cot a · sin b.
double motion_oracle(double x, int f, double theta, double lane, double w) {
  const double rad = std::numbers::pi / 180.0;
  const double shift = f * (std::cos(lane * rad) + std::sin(lane * rad) / std::tan(theta * rad));
  return std::clamp(std::floor(x + shift + 1e-9), 0.0, w);
}

Verdict motion() {
  Rng rng(3);
  const double w = 224.0;
  int mismatches = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double x = static_cast<double>(rng.index(225));
    const int f = static_cast<int>(rng.index(11));
    const double theta = 10.0 * static_cast<double>(1 + rng.index(17));
    const double lane = static_cast<double>(1 + rng.index(179));
    if (motion_update(x, f, theta, lane, w) != motion_oracle(x, f, theta, lane, w)) ++mismatches;
  }
  return {mismatches == 0, fmt("%d random grid points, %d mismatches", n, mismatches)};
}

// 4 ------------------------------------------------------------------------

// Counts unit cells whose centers fall inside both boxes.
double raster_overlap(const BoundingBox& a, const BoundingBox& b) {
  const int x0 = static_cast<int>(std::floor(std::max(a.x_min, b.x_min)));
  const int x1 = static_cast<int>(std::ceil(std::min(a.x_max, b.x_max)));
  const int y0 = static_cast<int>(std::floor(std::max(a.y_min, b.y_min)));
  const int y1 = static_cast<int>(std::ceil(std::min(a.y_max, b.y_max)));
  const auto inside = [](const BoundingBox& r, double px, double py) {
    return px > r.x_min && px < r.x_max && py > r.y_min && py < r.y_max;
  };
  long cells = 0;
  for (int i = x0; i < x1; ++i)
    for (int j = y0; j < y1; ++j)
      if (inside(a, i + 0.5, j + 0.5) && inside(b, i + 0.5, j + 0.5)) ++cells;
  return static_cast<double>(cells);
}

Verdict intersection() {
  Rng rng(4);
  int overlapping = 0, disjoint = 0, bad = 0;
  double worst = 0.0;
  while (overlapping < 10000 || disjoint < 10000) {
    const int aw = 2 * static_cast<int>(1 + rng.index(30));
    const int ah = 2 * static_cast<int>(1 + rng.index(30));
    const int ax = static_cast<int>(rng.index(200));
    const int ay = static_cast<int>(rng.index(200));
    const AgentPose agent{ax + aw / 2.0, ay + ah / 2.0, 10.0 * static_cast<double>(1 + rng.index(17)),
                          static_cast<double>(aw), static_cast<double>(ah)};
    // Objects land near the agent so most pairs overlap.
    const int bx = std::max(0, ax - 40 + static_cast<int>(rng.index(80)));
    const int by = std::max(0, ay - 40 + static_cast<int>(rng.index(80)));
    const BoundingBox obj{static_cast<double>(bx), static_cast<double>(by),
                          static_cast<double>(bx + 1 + static_cast<int>(rng.index(60))),
                          static_cast<double>(by + 1 + static_cast<int>(rng.index(60))), 1,
                          ObjectClass::kVehicle};
    const double cells = raster_overlap(agent_footprint(agent), obj);
    const double oracle = cells * std::cos((agent.theta - 90.0) * std::numbers::pi / 180.0);
    const double got = projected_intersection(agent, obj);
    if (cells == 0.0) {
      if (disjoint == 10000) continue;
      ++disjoint;
      if (got != 0.0) ++bad;
    } else if (cells >= 25.0 && overlapping < 10000) {
      ++overlapping;
      const double rel = std::abs(got - oracle) / oracle;
      worst = std::max(worst, rel);
      if (rel > 0.02) ++bad;
    }
  }
  return {bad == 0, fmt("%d overlapping pairs (max rel error %.2e), %d disjoint pairs, %d violations",
                        overlapping, worst, disjoint, bad)};
}

// 5 ------------------------------------------------------------------------

Verdict reward_branches() {
  const EnvConfig cfg = EnvConfig::for_frame(224, 224);
  Rng rng(5);
  double worst = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const int f = static_cast<int>(rng.index(11));
    const int f_new = static_cast<int>(rng.index(11));
    const double theta = 10.0 * static_cast<double>(1 + rng.index(17));
    const double lane = rng.uniform(1.0, 179.0);
    const double center = rng.uniform(0.0, 224.0);
    const double x_new = rng.uniform(0.0, 224.0);
    const double m_next = rng.uniform(0.0, 1.0);
    const double below = rng.uniform(0.0, cfg.intersection_threshold);
    const double above = rng.uniform(cfg.intersection_threshold, 1.0);
    const double lo = compute_reward(below, f, f_new, theta, lane, center, x_new, m_next, cfg).reward;
    const double hi = compute_reward(above, f, f_new, theta, lane, center, x_new, m_next, cfg).reward;
    // Speed and lane terms negate across the branch; the overlap penalty stays.
    const double penalty = -cfg.delta * m_next;
    worst = std::max(worst, std::abs((lo - penalty) + (hi - penalty)));
  }
  return {worst <= 1e-12, fmt("%d random inputs, max |flip residual| %.2e", n, worst)};
}

// 6 ------------------------------------------------------------------------

Verdict dueling() {
  const EnvConfig env = tiny_env();
  const nn::EncoderSpec spec = tiny_encoder_spec();
  const agents::ActionSpace space = agents::ActionSpace::from(env);
  Rng rng(6);
  double worst_mean = 0.0, worst_const = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    agents::DqnOptions opts;
    opts.encoder = spec;
    opts.hidden = 16;
    agents::DuelingDqnAgent agent(space, opts, seed, seed);
    for (int i = 0; i < 10; ++i) {
      agents::DuelingQNetwork::Tape tape;
      const auto& q = agent.online().forward(random_observation(spec, env, rng), tape);
      double mean = 0.0;
      for (double v : q) mean += v - tape.value;
      worst_mean = std::max(worst_mean, std::abs(mean / static_cast<double>(q.size())));
    }
    // Constant advantage stream: zero weights, shared bias.
    nn::ParamList params;
    agent.online().collect(params);
    for (nn::ParamBlock* p : params) {
      if (p->name == "q.advantage.weight") std::fill(p->values.begin(), p->values.end(), 0.0);
      if (p->name == "q.advantage.bias") std::fill(p->values.begin(), p->values.end(), rng.uniform(-3, 3));
    }
    agents::DuelingQNetwork::Tape tape;
    const auto& q = agent.online().forward(random_observation(spec, env, rng), tape);
    for (double v : q) worst_const = std::max(worst_const, std::abs(v - tape.value));
  }
  return {worst_mean <= 1e-9 && worst_const <= 1e-9,
          fmt("max |mean(Q - V)| %.2e over %zu actions, constant advantage max |Q - V| %.2e",
              worst_mean, space.joint_size(), worst_const)};
}

// 7 ------------------------------------------------------------------------

Verdict replay() {
  agents::ReplayBuffer buffer(5000);
  const Observation obs;
  bool fifo = true;
  for (std::uint64_t i = 0; i < 6000; ++i) {
    buffer.push({obs, {0, 90}, static_cast<double>(i), obs, false});
    const std::uint64_t expected = std::min<std::uint64_t>(i + 1, 5000);
    if (buffer.size() != expected) fifo = false;
  }
  std::vector<char> present(6000, 0);
  for (std::size_t k = 0; k < buffer.size(); ++k) present[buffer.at(k).serial] = 1;
  for (std::size_t s = 0; s < 6000; ++s) fifo = fifo && present[s] == (s >= 1000);

  Rng rng(derive_seed(7, Stream::kReplay));
  std::vector<double> counts(buffer.size(), 0.0);
  const int batches = 100000;
  bool distinct = true;
  std::vector<int> stamp(buffer.size(), -1);
  for (int b = 0; b < batches; ++b) {
    for (std::size_t k : buffer.sample_indices(128, rng)) {
      if (stamp[k] == b) distinct = false;
      stamp[k] = b;
      counts[k] += 1.0;
    }
  }
  const double expected = batches * 128.0 / static_cast<double>(buffer.size());
  double stat = 0.0;
  for (double c : counts) stat += (c - expected) * (c - expected) / expected;
  boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
  const double p = boost::math::cdf(boost::math::complement(dist, stat));
  return {fifo && distinct && p > 0.01,
          fmt("FIFO trace %s, batches distinct %s, chi2 p = %.3f over %d batches of 128",
              fifo ? "ok" : "broken", distinct ? "yes" : "no", p, batches)};
}

// 8, 9 ---------------------------------------------------------------------

TrainConfig trend_config(agents::AgentKind kind, std::uint64_t seed) {
  TrainConfig c;
  c.agent = kind;
  c.seed = seed;
  c.episodes = 300;
  c.window = 100;
  c.stride = 25;
  c.train_fraction = 0.5;
  c.lr = 1e-2;
  c.batch_size = 5;
  c.hidden = 32;
  c.encoder.input_rows = c.encoder.input_cols = 28;
  c.encoder.conv_channels = {4, 8};
  c.encoder.dense_out = 16;
  return c;
}

struct Last50 {
  double mean = 0.0;
  double sd = 0.0;
};

Last50 last50(const std::vector<MetricsRow>& rows) {
  const std::size_t n = 50, from = rows.size() - n;
  Last50 s;
  for (std::size_t i = from; i < rows.size(); ++i) s.mean += rows[i].total_reward;
  s.mean /= static_cast<double>(n);
  for (std::size_t i = from; i < rows.size(); ++i)
    s.sd += (rows[i].total_reward - s.mean) * (rows[i].total_reward - s.mean);
  s.sd = std::sqrt(s.sd / static_cast<double>(n - 1));
  return s;
}

double area_under_rolling(const std::vector<MetricsRow>& rows) {
  double a = 0.0;
  for (const auto& r : rows) a += r.rolling_mean;
  return a;
}

struct TrendRuns {
  std::vector<std::vector<MetricsRow>> ma, sa, random;
  double ma_random_seconds = 0.0;
};

TrendRuns trend_runs(const VideoAnnotation& video) {
  TrendRuns runs;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto t0 = Clock::now();
    runs.ma.push_back(train(trend_config(agents::AgentKind::kPgMa, seed), video).metrics);
    runs.random.push_back(train(trend_config(agents::AgentKind::kRandom, seed), video).metrics);
    runs.ma_random_seconds += seconds_since(t0);
    runs.sa.push_back(train(trend_config(agents::AgentKind::kPgSa, seed), video).metrics);
  }
  return runs;
}

Verdict learning_trend(const TrendRuns& runs) {
  int wins = 0;
  std::string per_seed;
  for (std::size_t s = 0; s < runs.ma.size(); ++s) {
    const Last50 pg = last50(runs.ma[s]);
    const Last50 rnd = last50(runs.random[s]);
    const bool win = pg.mean > rnd.mean + 3.0 * rnd.sd;
    wins += win;
    per_seed += fmt(" s%zu %.1f vs %.1f%s", s + 1, pg.mean, rnd.mean + 3.0 * rnd.sd, win ? "" : "(x)");
  }
  const double secs = runs.ma_random_seconds;
  return {wins >= 4 && secs < 600.0,
          fmt("PG_MA last-50 mean beats random mean + 3 sd in %d/5 seeds;%s; %.0f s",
              wins, per_seed.c_str(), secs)};
}

Verdict ma_vs_sa(const TrendRuns& runs) {
  int wins = 0;
  std::string per_seed;
  for (std::size_t s = 0; s < runs.ma.size(); ++s) {
    const double ma = area_under_rolling(runs.ma[s]);
    const double sa = area_under_rolling(runs.sa[s]);
    wins += ma >= sa;
    per_seed += fmt(" s%zu %.0f/%.0f", s + 1, ma, sa);
  }
  return {wins >= 3, fmt("PG_MA area under rolling mean >= PG_SA in %d/5 seeds; MA/SA:%s", wins,
                         per_seed.c_str())};
}

// 10 -----------------------------------------------------------------------

VideoAnnotation lane_video(int frames, double left, double right) {
  VideoAnnotation v;
  for (int i = 0; i < frames; ++i) {
    FrameAnnotation f;
    f.frame_index = i;
    f.depth = Grid<float>(8, 8, 0.5f);
    f.seg = Grid<std::int32_t>(8, 8, 0);
    f.lanes = {{{{left, 0}, {left, 224}}}, {{{right, 0}, {right, 224}}}};
    v.frames.push_back(std::move(f));
  }
  return v;
}

DoneReason drive(const VideoAnnotation& v, const std::vector<Action>& actions, bool* early_stop) {
  DrivingEnv env(v, tiny_env());
  Rng rng(1);
  env.reset({&v, 0, 0, v.frame_count()}, {InitMode::kFixed}, rng);
  *early_stop = false;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const StepResult r = env.step(actions[i]);
    if (r.done) {
      *early_stop = i + 1 != actions.size();
      return r.done_reason;
    }
  }
  return DoneReason::kNone;
}

Verdict done_conditions() {
  std::vector<std::string> failed;
  bool early = false;

  VideoAnnotation collision = lane_video(30, 40, 184);
  // Covers 60% of the agent footprint [95.2, 128.8] × [5.6, 39.2] from frame 5 on.
  for (int i = 5; i < 30; ++i)
    collision.frames[static_cast<std::size_t>(i)].boxes = {{95.2, 0, 95.2 + 0.6 * 33.6, 60, 1, ObjectClass::kVehicle}};
  if (drive(collision, {{5, 90}}, &early) != DoneReason::kCollision || early) failed.push_back("collision");

  const VideoAnnotation narrow = lane_video(100, 90, 134);
  if (drive(narrow, {{2, 90}, {5, 10}}, &early) != DoneReason::kOffRoad || early) failed.push_back("off_road");

  const VideoAnnotation plain = lane_video(100, 40, 184);
  if (drive(plain, std::vector<Action>(20, Action{0, 90}), &early) != DoneReason::kRestTimeout || early)
    failed.push_back("rest_timeout");
  if (drive(plain, std::vector<Action>(10, Action{10, 90}), &early) != DoneReason::kEndOfChunk || early)
    failed.push_back("end_of_chunk");

  const LaneStats d = frame_lane_stats({}, 224);
  if (d.theta_lane != 90.0 || std::abs(d.l_lane - 44.8) > 1e-12 || std::abs(d.r_lane - 179.2) > 1e-12)
    failed.push_back("default lane stats");
  VideoAnnotation laneless = lane_video(10, 0, 0);
  for (auto& f : laneless.frames) f.lanes.clear();
  DrivingEnv env(laneless, tiny_env());
  Rng rng(1);
  const Observation o = env.reset({&laneless, 0, 0, 10}, {InitMode::kFixed}, rng);
  if (o.theta_lane != 90.0 || std::abs(o.x - 112.0) > 1e-12) failed.push_back("laneless reset");

  std::string what = "collision, off_road, rest_timeout, end_of_chunk and laneless defaults";
  if (!failed.empty()) {
    what = "failed:";
    for (const auto& f : failed) what += " " + f;
  }
  return {failed.empty(), what};
}

// 11 -----------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

bool shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return status != -1 && WIFEXITED(status) && WEXITSTATUS(status) == 0;
}

Verdict reproducibility() {
  const fs::path root = fs::temp_directory_path() / "vdrive_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  std::ofstream(root / "scene.txt") << "n_frames=200\nobstacle_count=2\nlane_count=3\n";
  const std::string cli = VDRIVE_CLI_PATH;
  const std::vector<std::string> kinds{"PG_MA", "A2C_MA", "DUELING_DQN"};
  for (const auto& kind : kinds) {
    std::ofstream(root / (kind + ".cfg"))
        << "agent=" << kind << "\nepisodes=20\nlr=0.01\nlr_critic=0.01\nbatch_size=5\nhidden=16\n"
        << "encoder.input_rows=28\nencoder.input_cols=28\nencoder.conv_channels=4,8\nencoder.dense_out=16\n"
        << "dqn.batch=32\ndqn.target_sync=50\n";
  }
  std::vector<std::string> artifacts;
  for (int run = 0; run < 2; ++run) {
    const fs::path d = root / ("run" + std::to_string(run));
    fs::create_directories(d);
    if (!shell(fmt("\"%s\" gen --spec \"%s\" --out \"%s\" --seed 7 > /dev/null", cli.c_str(),
                   (root / "scene.txt").c_str(), (d / "scene.json").c_str())))
      return {false, "gen failed"};
    for (const auto& kind : kinds) {
      const fs::path k = d / kind;
      if (!shell(fmt("\"%s\" train --config \"%s\" --annotations \"%s\" --checkpoint \"%s.ckpt\" "
                     "--metrics \"%s.csv\" --audit \"%s.audit\" --seed 11 --quiet > /dev/null",
                     cli.c_str(), (root / (kind + ".cfg")).c_str(), (d / "scene.json").c_str(),
                     k.c_str(), k.c_str(), k.c_str())))
        return {false, "train failed for " + kind};
      if (!shell(fmt("\"%s\" eval --checkpoint \"%s.ckpt\" --annotations \"%s\" --trace \"%s.trace\" > \"%s.out\"",
                     cli.c_str(), k.c_str(), (d / "scene.json").c_str(), k.c_str(), k.c_str())))
        return {false, "eval failed for " + kind};
    }
    std::string all = slurp(d / "scene.json");
    for (const auto& kind : kinds)
      for (const char* ext : {".ckpt", ".csv", ".audit", ".trace", ".out"})
        all += slurp(d / (kind + ext));
    artifacts.push_back(std::move(all));
  }
  const bool same = artifacts[0] == artifacts[1];
  const std::size_t bytes = artifacts[0].size();
  fs::remove_all(root);
  return {same, fmt("gen -> train -> eval for PG_MA, A2C_MA, DUELING_DQN; %zu bytes of artifacts %s",
                    bytes, same ? "identical" : "DIFFER")};
}

}  // namespace

int main() {
  int failures = 0;
  const auto report = [&](int n, const char* title, const Verdict& v) {
    std::printf("criterion %2d %s  %s: %s\n", n, v.pass ? "PASS" : "FAIL", title, v.detail.c_str());
    std::fflush(stdout);
    failures += !v.pass;
  };
  const auto guarded = [](const std::function<Verdict()>& f) {
    try {
      return f();
    } catch (const std::exception& e) {
      return Verdict{false, std::string("exception: ") + e.what()};
    }
  };

  report(1, "gradient correctness", guarded(gradients));
  report(2, "log-prob factorization", guarded(factorization));
  report(3, "motion oracle", guarded(motion));
  report(4, "intersection oracle", guarded(intersection));
  report(5, "reward branch algebra", guarded(reward_branches));
  report(6, "dueling identity", guarded(dueling));
  report(7, "replay semantics", guarded(replay));
  try {
    const VideoAnnotation video = generate_synthetic(SyntheticSceneSpec{});
    const TrendRuns runs = trend_runs(video);
    report(8, "learning trend", learning_trend(runs));
    report(9, "MA vs SA trend", ma_vs_sa(runs));
  } catch (const std::exception& e) {
    report(8, "learning trend", {false, std::string("exception: ") + e.what()});
    report(9, "MA vs SA trend", {false, "not run"});
  }
  report(10, "done conditions", guarded(done_conditions));
  report(11, "reproducibility", guarded(reproducibility));
  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
