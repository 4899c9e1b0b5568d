#include "vdrive/geometry.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace vdrive {

namespace {
constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;
constexpr double kExtremeWidening = 1.0;
}  // namespace

double lane_angle(const LanePolyline& lane) {
  if (lane.points.size() < 2) throw DegenerateLaneError("lane needs at least two points");
  const LanePoint& a = lane.points.front();
  const LanePoint& b = lane.points.back();
  if (a == b) throw DegenerateLaneError("lane endpoints coincide");
  double deg = std::atan2(b.q - a.q, b.p - a.p) * kRadToDeg;
  if (deg <= 0.0) deg += 180.0;
  return deg;
}

LaneStats frame_lane_stats(std::span<const LanePolyline> lanes, double frame_width) {
  LaneStats stats{90.0, 0.2 * frame_width, 0.8 * frame_width};
  if (lanes.empty()) return stats;

  double angle_sum = 0.0;
  int angle_count = 0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const LanePolyline& lane : lanes) {
    if (lane.points.size() >= 2 && lane.points.front() != lane.points.back()) {
      angle_sum += lane_angle(lane);
      ++angle_count;
    }
    for (const LanePoint& pt : lane.points) {
      lo = std::min(lo, pt.p);
      hi = std::max(hi, pt.p);
    }
  }
  if (angle_count > 0) stats.theta_lane = angle_sum / angle_count;
  if (std::isfinite(lo) && std::isfinite(hi)) {
    if (hi == lo) {
      lo -= kExtremeWidening;
      hi += kExtremeWidening;
    }
    stats.l_lane = std::clamp(lo, 0.0, frame_width);
    stats.r_lane = std::clamp(hi, 0.0, frame_width);
  }
  return stats;
}

double lane_x_at_bottom(const LanePolyline& lane) {
  const LanePoint& a = lane.points.front();
  const LanePoint& b = lane.points.back();
  if (a.q == b.q) return 0.5 * (a.p + b.p);
  return a.p + (0.0 - a.q) * (b.p - a.p) / (b.q - a.q);
}

double box_overlap(const BoundingBox& a, const BoundingBox& b) {
  const double w = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double h = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

BoundingBox agent_footprint(const AgentPose& agent) {
  BoundingBox box;
  box.x_min = agent.x - agent.width / 2.0;
  box.x_max = agent.x + agent.width / 2.0;
  box.y_min = agent.y - agent.height / 2.0;
  box.y_max = agent.y + agent.height / 2.0;
  return box;
}

double projected_intersection(const AgentPose& agent, const BoundingBox& obj) {
  const double scale = std::cos((agent.theta - 90.0) * kDegToRad);
  assert(scale >= 0.0);
  return box_overlap(agent_footprint(agent), obj) * scale;
}

double max_intersection(const AgentPose& agent, std::span<const BoundingBox> boxes) {
  double best = 0.0;
  for (const BoundingBox& b : boxes) best = std::max(best, projected_intersection(agent, b));
  return std::clamp(best / agent.area(), 0.0, 1.0);
}

double nearest_lane_gap_center(std::span<const LanePolyline> lanes, const LaneStats& stats,
                               double x) {
  if (lanes.size() < 2) return 0.5 * (stats.l_lane + stats.r_lane);
  std::vector<double> xs;
  xs.reserve(lanes.size());
  for (const LanePolyline& lane : lanes) xs.push_back(lane_x_at_bottom(lane));
  std::stable_sort(xs.begin(), xs.end(),
                   [x](double a, double b) { return std::abs(a - x) < std::abs(b - x); });
  return 0.5 * (xs[0] + xs[1]);
}

}  // namespace vdrive
