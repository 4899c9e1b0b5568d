#include "vdrive/env.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace vdrive {

namespace {
constexpr double kDegToRad = std::numbers::pi / 180.0;
// Absorbs trigonometric rounding so exact integer displacements are not
// floored one pixel short.
constexpr double kFloorSlack = 1e-9;
}  // namespace

EnvConfig EnvConfig::for_frame(int width, int height) {
  EnvConfig cfg;
  cfg.frame_width = width;
  cfg.agent_width = 0.15 * width;
  cfg.agent_height = 0.15 * width;
  cfg.agent_y = 0.1 * height;
  cfg.obs_rows = height;
  cfg.obs_cols = width;
  return cfg;
}

std::vector<int> EnvConfig::angle_set() const {
  std::vector<int> angles;
  for (int a = angle_min; a <= angle_max; a += angle_step) angles.push_back(a);
  return angles;
}

void EnvConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& msg) {
    throw std::invalid_argument("EnvConfig." + field + " " + msg);
  };
  if (f_max < 1) fail("f_max", "must be at least 1");
  if (angle_step <= 0 || angle_min < 10 || angle_max > 170 || angle_min > angle_max) {
    fail("angle_set", "must lie within [10, 170] with a positive step");
  }
  if (!(intersection_threshold > 0.0 && intersection_threshold < 1.0)) {
    fail("intersection_threshold", "must lie in (0, 1)");
  }
  if (!(collision_threshold > 0.0 && collision_threshold < 1.0)) {
    fail("collision_threshold", "must lie in (0, 1)");
  }
  if (rest_timeout < 1) fail("rest_timeout", "must be at least 1");
  if (!(agent_width > 0.0) || !(agent_height > 0.0)) fail("agent_width", "must be positive");
  if (alpha < 0.0 || beta < 0.0 || delta < 0.0 || mu < 0.0 || nu < 0.0) {
    fail("alpha", "reward coefficients must be non-negative");
  }
  if (!(frame_width > 0.0)) fail("frame_width", "must be positive");
  if (obs_rows < 1 || obs_cols < 1) fail("obs_rows", "must be positive");
}

std::string_view to_string(DoneReason reason) {
  switch (reason) {
    case DoneReason::kNone:
      return "none";
    case DoneReason::kEndOfChunk:
      return "end_of_chunk";
    case DoneReason::kCollision:
      return "collision";
    case DoneReason::kOffRoad:
      return "off_road";
    case DoneReason::kRestTimeout:
      return "rest_timeout";
  }
  return "none";
}

double motion_update(double x, int f_new, double theta_new, double theta_lane,
                     double frame_width) {
  assert(theta_new >= 10.0 && theta_new <= 170.0);
  const double shift = f_new * std::sin((theta_new + theta_lane) * kDegToRad) /
                       std::sin(theta_new * kDegToRad);
  const double moved = std::floor(x + shift + kFloorSlack);
  return std::clamp(moved, 0.0, frame_width);
}

RewardTerms compute_reward(double m, int f, int f_new, double theta_new, double theta_lane_next,
                           double lane_center, double x_new, double m_next,
                           const EnvConfig& cfg) {
  const double heading_gap = (theta_new - theta_lane_next) * kDegToRad;
  RewardTerms out;
  out.reward_lane = cfg.mu * std::abs(std::cos(heading_gap)) -
                    cfg.mu * std::abs(std::sin(heading_gap)) -
                    cfg.nu * std::abs(lane_center - x_new) / cfg.frame_width;
  const double progress = cfg.alpha * (f_new - f) / cfg.f_max;
  const double sign = m < cfg.intersection_threshold ? 1.0 : -1.0;
  out.reward = sign * (progress + cfg.beta * out.reward_lane) - cfg.delta * m_next;
  return out;
}

DrivingEnv::DrivingEnv(const VideoAnnotation& video, EnvConfig cfg)
    : video_(&video), cfg_(std::move(cfg)) {
  cfg_.validate();
}

LaneStats DrivingEnv::lane_stats(int frame) const {
  return frame_lane_stats(video_->frames.at(static_cast<std::size_t>(frame)).lanes,
                          cfg_.frame_width);
}

AgentPose DrivingEnv::pose(double x, double theta) const {
  return AgentPose{x, cfg_.agent_y, theta, cfg_.agent_width, cfg_.agent_height};
}

std::shared_ptr<const std::vector<double>> DrivingEnv::channels(int frame) const {
  if (auto it = channel_cache_.find(frame); it != channel_cache_.end()) return it->second;
  const FrameAnnotation& fr = video_->frames.at(static_cast<std::size_t>(frame));
  const auto rows = static_cast<std::size_t>(cfg_.obs_rows);
  const auto cols = static_cast<std::size_t>(cfg_.obs_cols);
  Grid<float> occupancy(fr.seg.rows, fr.seg.cols);
  for (std::size_t k = 0; k < fr.seg.data.size(); ++k) {
    occupancy.data[k] = fr.seg.data[k] != 0 ? 1.0f : 0.0f;
  }
  const Grid<float> depth = resize_area(fr.depth, rows, cols);
  const Grid<float> occ = resize_area(occupancy, rows, cols);
  auto data = std::make_shared<std::vector<double>>(2 * rows * cols);
  std::copy(depth.data.begin(), depth.data.end(), data->begin());
  std::copy(occ.data.begin(), occ.data.end(), data->begin() + static_cast<std::ptrdiff_t>(rows * cols));
  channel_cache_.emplace(frame, data);
  return data;
}

Observation DrivingEnv::observe() const {
  const LaneStats stats = lane_stats(state_.cursor);
  const auto& lanes = video_->frames.at(static_cast<std::size_t>(state_.cursor)).lanes;
  Observation obs;
  obs.channels = channels(state_.cursor);
  obs.channel_rows = cfg_.obs_rows;
  obs.channel_cols = cfg_.obs_cols;
  obs.x = state_.x;
  obs.f = state_.f;
  obs.theta = state_.theta;
  obs.l_lane = stats.l_lane;
  obs.r_lane = stats.r_lane;
  obs.theta_lane = stats.theta_lane;
  obs.lane_center = nearest_lane_gap_center(lanes, stats, state_.x);
  obs.frame = state_.cursor;
  return obs;
}

Observation DrivingEnv::reset(const Chunk& chunk, const InitSpec& init, Rng& rng) {
  if (chunk.length < 2 || chunk.start < 0 || chunk.start + chunk.length > video_->frame_count()) {
    throw std::invalid_argument("chunk does not fit the video");
  }
  state_ = State{};
  state_.chunk = chunk;
  state_.cursor = chunk.start;
  state_.f = 0;
  state_.rest_steps = 0;
  state_.done = false;
  const LaneStats stats = lane_stats(chunk.start);
  if (init.mode == InitMode::kFixed) {
    state_.x = 0.5 * (stats.l_lane + stats.r_lane);
    state_.theta = 90.0;
  } else {
    const std::vector<int> angles = cfg_.angle_set();
    state_.x = rng.uniform(stats.l_lane, stats.r_lane);
    state_.theta = angles[rng.index(angles.size())];
  }
  return observe();
}

StepResult DrivingEnv::step(const Action& action) {
  if (state_.done) throw std::logic_error("step called on a finished episode; call reset first");
  if (action.f < 0 || action.f > cfg_.f_max) throw std::invalid_argument("action speed out of range");
  if (action.theta < cfg_.angle_min || action.theta > cfg_.angle_max ||
      (action.theta - cfg_.angle_min) % cfg_.angle_step != 0) {
    throw std::invalid_argument("action angle not in the angle set");
  }

  const FrameAnnotation& current = video_->frames.at(static_cast<std::size_t>(state_.cursor));
  const LaneStats stats_now = lane_stats(state_.cursor);
  const double m = max_intersection(pose(state_.x, state_.theta), current.boxes);

  const double x_new =
      motion_update(state_.x, action.f, action.theta, stats_now.theta_lane, cfg_.frame_width);

  const int last = state_.chunk.start + state_.chunk.length - 1;
  int cursor = state_.cursor + action.f;
  const bool end_of_chunk = cursor >= last;
  cursor = std::min(cursor, last);

  const FrameAnnotation& next = video_->frames.at(static_cast<std::size_t>(cursor));
  const LaneStats stats_next = lane_stats(cursor);
  const double lane_center = nearest_lane_gap_center(next.lanes, stats_next, x_new);
  const double m_next = max_intersection(pose(x_new, action.theta), next.boxes);

  const RewardTerms terms = compute_reward(m, state_.f, action.f, action.theta,
                                           stats_next.theta_lane, lane_center, x_new, m_next, cfg_);

  state_.rest_steps = action.f == 0 ? state_.rest_steps + 1 : 0;
  state_.cursor = cursor;
  state_.x = x_new;
  state_.f = action.f;
  state_.theta = action.theta;

  StepResult result;
  result.reward = terms.reward;
  result.info = StepInfo{m, m_next, terms.reward_lane, lane_center};
  if (m_next > cfg_.collision_threshold) {
    result.done_reason = DoneReason::kCollision;
  } else if (x_new < stats_next.l_lane || x_new > stats_next.r_lane) {
    result.done_reason = DoneReason::kOffRoad;
  } else if (state_.rest_steps >= cfg_.rest_timeout) {
    result.done_reason = DoneReason::kRestTimeout;
  } else if (end_of_chunk) {
    result.done_reason = DoneReason::kEndOfChunk;
  }
  result.done = result.done_reason != DoneReason::kNone;
  state_.done = result.done;
  result.observation = observe();
  return result;
}

}  // namespace vdrive
