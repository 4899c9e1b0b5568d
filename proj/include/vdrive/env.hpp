#pragma once

// The driving MDP over one chunk of an annotated video: the agent sits at a
// fixed height near the bottom of the frame, speed f advances the frame
// cursor and the heading θ moves the agent sideways relative to the lanes.

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "vdrive/annotation.hpp"
#include "vdrive/geometry.hpp"
#include "vdrive/rng.hpp"

namespace vdrive {

struct EnvConfig {
  int f_max = 10;
  int angle_min = 10;
  int angle_max = 170;
  int angle_step = 10;
  double intersection_threshold = 0.2;
  double collision_threshold = 0.5;
  int rest_timeout = 20;
  double agent_width = 33.6;   // 0.15·w for w = 224
  double agent_height = 33.6;  // 0.15·w
  double agent_y = 22.4;       // 0.1·h
  double alpha = 1.0;
  double beta = 1.0;
  double delta = 0.1;
  double mu = 1.0;
  double nu = 1.0;
  double frame_width = 224.0;
  // Resolution of the observation channels (area-averaged from the frame).
  int obs_rows = 224;
  int obs_cols = 224;

  /// Default geometry for a w × h video.
  static EnvConfig for_frame(int width, int height);

  std::vector<int> angle_set() const;
  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct Action {
  int f = 0;
  int theta = 90;  // degrees, one of the angle set

  bool operator==(const Action&) const = default;
};

/// Raw per-step percept. The channel grid is frame data shared between all
/// observations of the same frame.
struct Observation {
  std::shared_ptr<const std::vector<double>> channels;  // [depth; occupancy], row-major
  int channel_rows = 0;
  int channel_cols = 0;
  double x = 0.0;
  double f = 0.0;
  double theta = 90.0;
  double l_lane = 0.0;
  double r_lane = 0.0;
  double theta_lane = 90.0;
  double lane_center = 0.0;  // l′ for the current x
  int frame = 0;
};

enum class DoneReason { kNone, kEndOfChunk, kCollision, kOffRoad, kRestTimeout };

std::string_view to_string(DoneReason reason);

struct StepInfo {
  double m = 0.0;
  double m_next = 0.0;
  double reward_lane = 0.0;
  double lane_center = 0.0;
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  DoneReason done_reason = DoneReason::kNone;
  StepInfo info;
};

enum class InitMode { kRandomized, kFixed };

struct InitSpec {
  InitMode mode = InitMode::kRandomized;
};

/// ⌊x + f′·sin(θ′+θ_lane)/sin θ′⌋ clamped to [0, w]. θ′ must lie in [10°, 170°].
double motion_update(double x, int f_new, double theta_new, double theta_lane, double frame_width);

struct RewardTerms {
  double reward = 0.0;
  double reward_lane = 0.0;
};

RewardTerms compute_reward(double m, int f, int f_new, double theta_new, double theta_lane_next,
                           double lane_center, double x_new, double m_next, const EnvConfig& cfg);

class DrivingEnv {
 public:
  struct State {
    Chunk chunk;
    int cursor = 0;
    double x = 0.0;
    int f = 0;
    double theta = 90.0;
    int rest_steps = 0;
    bool done = true;

    bool operator==(const State& o) const {
      return chunk.start == o.chunk.start && chunk.length == o.chunk.length &&
             cursor == o.cursor && x == o.x && f == o.f && theta == o.theta &&
             rest_steps == o.rest_steps && done == o.done;
    }
  };

  /// The video must outlive the environment.
  DrivingEnv(const VideoAnnotation& video, EnvConfig cfg);

  Observation reset(const Chunk& chunk, const InitSpec& init, Rng& rng);

  /// Throws std::logic_error once the episode is done.
  StepResult step(const Action& action);

  State snapshot() const { return state_; }
  void restore(const State& state) { state_ = state; }

  const EnvConfig& config() const { return cfg_; }
  const VideoAnnotation& video() const { return *video_; }
  bool done() const { return state_.done; }

  LaneStats lane_stats(int frame) const;
  Observation observe() const;

 private:
  AgentPose pose(double x, double theta) const;
  std::shared_ptr<const std::vector<double>> channels(int frame) const;

  const VideoAnnotation* video_;
  EnvConfig cfg_;
  State state_;
  mutable std::unordered_map<int, std::shared_ptr<const std::vector<double>>> channel_cache_;
};

}  // namespace vdrive
