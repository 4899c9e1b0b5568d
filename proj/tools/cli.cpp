#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "vdrive/annotation.hpp"
#include "vdrive/config.hpp"
#include "vdrive/geometry.hpp"
#include "vdrive/nn/checkpoint.hpp"
#include "vdrive/simd/kernels.hpp"
#include "vdrive/trainer.hpp"
#include "vdrive/verification.hpp"

namespace vdrive::cli {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::map<std::string, std::string> read_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(path + ": expected key=value, got '" + line + "'");
    auto strip = [](std::string s) {
      const auto l = s.find_first_not_of(" \t\r");
      const auto r = s.find_last_not_of(" \t\r");
      return l == std::string::npos ? std::string() : s.substr(l, r - l + 1);
    };
    out[strip(line.substr(0, eq))] = strip(line.substr(eq + 1));
  }
  return out;
}

SyntheticSceneSpec scene_from_file(const std::string& path) {
  SyntheticSceneSpec spec;
  for (const auto& [key, value] : read_key_values(path)) {
    try {
      if (key == "n_frames") spec.n_frames = std::stoi(value);
      else if (key == "width") spec.width = std::stoi(value);
      else if (key == "height") spec.height = std::stoi(value);
      else if (key == "lane_count") spec.lane_count = std::stoi(value);
      else if (key == "lane_curvature") spec.lane_curvature = std::stod(value);
      else if (key == "obstacle_count") spec.obstacle_count = std::stoi(value);
      else if (key == "obstacle_speed_min") spec.obstacle_speed_min = std::stod(value);
      else if (key == "obstacle_speed_max") spec.obstacle_speed_max = std::stod(value);
      else if (key == "seed") spec.rng_seed = std::stoull(value);
      else throw ConfigError("scene spec: unknown key '" + key + "'");
    } catch (const std::logic_error& e) {
      if (dynamic_cast<const ConfigError*>(&e) != nullptr) throw;
      throw ConfigError("scene spec: bad value for " + key + ": '" + value + "'");
    }
  }
  return spec;
}

std::uint64_t seed_from_env(std::uint64_t fallback) {
  if (const char* s = std::getenv("VDRIVE_SEED")) {
    try {
      return std::stoull(s);
    } catch (const std::exception&) {
      throw ConfigError(std::string("VDRIVE_SEED is not an integer: ") + s);
    }
  }
  return fallback;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Annotated driving-video environment and learners"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "Generate a synthetic annotated scene");
  std::string gen_spec, gen_out;
  std::uint64_t gen_seed = 0;
  gen->add_option("--spec", gen_spec, "Scene spec file (key=value)")->check(CLI::ExistingFile);
  gen->add_option("--out", gen_out, "Output annotation file")->required();
  auto* gen_seed_opt = gen->add_option("--seed", gen_seed, "Scene seed (overrides the spec)");
  std::size_t gen_grid = 56;
  gen->add_option("--grid", gen_grid, "Side of the stored depth/seg grid (0 = full frame)");

  auto* train_cmd = app.add_subcommand("train", "Train an agent");
  std::string tr_config, tr_ann, tr_ckpt, tr_metrics, tr_audit;
  std::uint64_t tr_seed = 0;
  bool tr_wall = false, tr_quiet = false;
  train_cmd->add_option("--config", tr_config, "Training config (key=value)")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--annotations", tr_ann, "Annotation file")->required();
  train_cmd->add_option("--checkpoint", tr_ckpt, "Checkpoint output")->required();
  train_cmd->add_option("--metrics", tr_metrics, "Metrics CSV output")->required();
  train_cmd->add_option("--audit", tr_audit, "Chunk audit log output");
  auto* tr_seed_opt = train_cmd->add_option("--seed", tr_seed, "Master seed (else VDRIVE_SEED, else config)");
  train_cmd->add_flag("--wall-clock", tr_wall, "Record per-episode wall time");
  train_cmd->add_flag("--quiet", tr_quiet, "Suppress per-episode progress");

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a whole video");
  std::string ev_ckpt, ev_ann, ev_trace;
  std::uint64_t ev_seed = 1;
  int ev_max_steps = 100000;
  eval_cmd->add_option("--checkpoint", ev_ckpt, "Checkpoint file")->required();
  eval_cmd->add_option("--annotations", ev_ann, "Annotation file")->required();
  eval_cmd->add_option("--seed", ev_seed, "Seed for stochastic baselines");
  eval_cmd->add_option("--max-steps", ev_max_steps, "Step cap")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--trace", ev_trace, "Per-step trace CSV output");

  auto* inspect = app.add_subcommand("inspect", "Print per-frame lane statistics and overlap");
  std::string in_ann;
  inspect->add_option("--annotations", in_ann, "Annotation file")->required();

  auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of all gradients");
  int gc_seeds = 10;
  double gc_tol = kGradCheckTolerance;
  bool gc_verbose = false;
  gc->add_option("--seeds", gc_seeds, "Number of random seeds")->check(CLI::PositiveNumber);
  gc->add_option("--tol", gc_tol, "Relative tolerance");
  gc->add_flag("--verbose", gc_verbose, "Print every case");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (gen->parsed()) {
      SyntheticSceneSpec spec = gen_spec.empty() ? SyntheticSceneSpec{} : scene_from_file(gen_spec);
      if (gen_seed_opt->count() > 0) spec.rng_seed = gen_seed;
      const VideoAnnotation video = generate_synthetic(spec);
      save_annotations(video, gen_out, gen_grid, gen_grid);
      out << "wrote " << video.frame_count() << " frames to " << gen_out << "\n";
      return 0;
    }

    if (train_cmd->parsed()) {
      TrainConfig config = load_config(tr_config);
      config.seed = tr_seed_opt->count() > 0 ? tr_seed : seed_from_env(config.seed);
      config.validate();
      const VideoAnnotation video = load_annotations(tr_ann);
      TrainOptions opts;
      opts.record_wall_clock = tr_wall;
      if (!tr_quiet) {
        opts.on_episode = [&](const MetricsRow& r) {
          out << "episode " << r.episode << " reward " << fmt(r.total_reward) << " length " << r.length
              << " " << to_string(r.done_reason) << " rolling " << fmt(r.rolling_mean) << "\n";
        };
      }
      const TrainResult result = train(config, video, opts);
      save_trained_agent(tr_ckpt, *result.agent, config);
      write_metrics_csv(tr_metrics, result.metrics);
      if (!tr_audit.empty()) {
        std::ofstream audit(tr_audit, std::ios::binary);
        audit << "# train chunks:";
        for (const Chunk& c : result.split.train) audit << ' ' << c.id;
        audit << "\n# test chunks:";
        for (const Chunk& c : result.split.test) audit << ' ' << c.id;
        audit << "\nepisode,chunk_id\n";
        for (const ChunkVisit& v : result.audit) audit << v.episode << ',' << v.chunk_id << '\n';
      }
      out << "trained " << to_string(config.agent) << " for " << config.episodes << " episodes; kernels "
          << simd::to_string(simd::active_isa()) << "\n";
      return 0;
    }

    if (eval_cmd->parsed()) {
      const VideoAnnotation video = load_annotations(ev_ann);
      LoadedAgent loaded = load_trained_agent(ev_ckpt, video.width, video.height);
      const EnvConfig env = resolve_env(loaded.config, video.width, video.height);
      const EvalResult result = evaluate(*loaded.agent, video, env, ev_seed, ev_max_steps);
      if (!ev_trace.empty()) {
        std::ofstream trace(ev_trace, std::ios::binary);
        trace << "step,frame,x,f,theta,reward,m_next\n";
        for (std::size_t t = 0; t < result.trace.size(); ++t) {
          const EvalStep& s = result.trace[t];
          trace << t << ',' << s.frame << ',' << fmt(s.x) << ',' << s.action.f << ',' << s.action.theta
                << ',' << fmt(s.reward) << ',' << fmt(s.m_next) << '\n';
        }
      }
      out << "agent=" << to_string(loaded.config.agent) << " total_reward=" << fmt(result.total_reward)
          << " length=" << result.length << " done_reason=" << to_string(result.done_reason) << "\n";
      return 0;
    }

    if (inspect->parsed()) {
      const VideoAnnotation video = load_annotations(in_ann);
      const EnvConfig env = EnvConfig::for_frame(video.width, video.height);
      out << "frame,theta_lane,l_lane,r_lane,boxes,m_center\n";
      for (const FrameAnnotation& fr : video.frames) {
        const LaneStats s = frame_lane_stats(fr.lanes, env.frame_width);
        const AgentPose pose{0.5 * (s.l_lane + s.r_lane), env.agent_y, 90.0, env.agent_width, env.agent_height};
        out << fr.frame_index << ',' << fmt(s.theta_lane) << ',' << fmt(s.l_lane) << ',' << fmt(s.r_lane)
            << ',' << fr.boxes.size() << ',' << fmt(max_intersection(pose, fr.boxes)) << '\n';
      }
      return 0;
    }

    if (gc->parsed()) {
      const std::vector<GradCheckCase> cases = run_gradcheck_suite(gc_seeds);
      const GradCheckCase* worst = &cases.front();
      for (const GradCheckCase& c : cases) {
        if (gc_verbose) {
          out << c.name << " seed " << c.seed << " max_rel_error " << fmt(c.report.max_rel_error) << "\n";
        }
        if (c.report.max_rel_error > worst->report.max_rel_error) worst = &c;
      }
      const bool ok = worst->report.max_rel_error <= gc_tol;
      out << "cases " << cases.size() << " max rel error " << fmt(worst->report.max_rel_error) << " ("
          << worst->name << ", seed " << worst->seed << ", block " << worst->report.worst_block << ") "
          << (ok ? "ok" : "FAILED") << "\n";
      return ok ? 0 : 1;
    }
  } catch (const ConfigError& e) {
    err << "invalid configuration: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace vdrive::cli
