#pragma once

// Lane statistics and the projected agent/object overlap used for reward and
// termination. All functions are pure.

#include <span>
#include <stdexcept>

#include "vdrive/annotation.hpp"

namespace vdrive {

struct LaneStats {
  double theta_lane = 90.0;  // degrees
  double l_lane = 0.0;       // leftmost lane x
  double r_lane = 0.0;       // rightmost lane x
};

struct AgentPose {
  double x = 0.0;  // center
  double y = 0.0;  // center, fixed for the episode
  double theta = 90.0;
  double width = 1.0;
  double height = 1.0;

  double area() const { return width * height; }
};

class DegenerateLaneError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Heading of the chord from the first to the last point, folded into
/// (0°, 180°]. Throws DegenerateLaneError when the endpoints coincide.
double lane_angle(const LanePolyline& lane);

/// Mean lane angle plus min/max lane x. Frames without lanes fall back to
/// (90°, 0.2w, 0.8w); coincident extremes are widened by one pixel.
LaneStats frame_lane_stats(std::span<const LanePolyline> lanes, double frame_width);

/// x of the lane's chord at the bottom row (q = 0).
double lane_x_at_bottom(const LanePolyline& lane);

/// Area of the intersection of two axis-aligned boxes (0 when disjoint).
double box_overlap(const BoundingBox& a, const BoundingBox& b);

BoundingBox agent_footprint(const AgentPose& agent);

/// Axis-aligned overlap of the agent footprint with obj, scaled by cos(θ−90°).
double projected_intersection(const AgentPose& agent, const BoundingBox& obj);

/// Largest projected_intersection over boxes divided by the agent area; in [0, 1].
double max_intersection(const AgentPose& agent, std::span<const BoundingBox> boxes);

/// Midpoint of the two lanes whose bottom-row x is closest to x; with fewer
/// than two lanes, the midpoint of the lane extremes.
double nearest_lane_gap_center(std::span<const LanePolyline> lanes, const LaneStats& stats,
                               double x);

}  // namespace vdrive
