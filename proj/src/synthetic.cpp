#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "vdrive/annotation.hpp"
#include "vdrive/rng.hpp"

namespace vdrive {

namespace {

constexpr int kLanePoints = 9;
constexpr double kDegToRad = std::numbers::pi / 180.0;

struct Obstacle {
  int id;
  double x_center;
  double y_min;
  double width;
  double height;
  double speed;
};

Obstacle spawn(int id, double y_min, const SyntheticSceneSpec& spec, Rng& rng) {
  const double w = spec.width;
  const double h = spec.height;
  Obstacle o;
  o.id = id;
  o.width = rng.uniform(0.12, 0.20) * w;
  o.height = rng.uniform(0.12, 0.20) * h;
  o.x_center = rng.uniform(0.30, 0.70) * w;
  o.y_min = y_min;
  o.speed = rng.uniform(spec.obstacle_speed_min, spec.obstacle_speed_max);
  return o;
}

// Lanes pivot about mid-height so that a heading drift keeps them on screen;
// each lane is clipped to the q-range where its straight-line fit stays in
// frame, and bowed by a term that vanishes at both endpoints.
std::vector<LanePolyline> make_lanes(const SyntheticSceneSpec& spec, double heading_deg) {
  const double w = spec.width;
  const double h = spec.height;
  const double cot = std::cos(heading_deg * kDegToRad) / std::sin(heading_deg * kDegToRad);
  const double bow = 0.1 * w * std::sin((heading_deg - 90.0) * kDegToRad);
  std::vector<LanePolyline> lanes;
  for (int k = 0; k < spec.lane_count; ++k) {
    const double x_mid = w * (0.25 + 0.5 * k / (spec.lane_count - 1));
    double q_lo = 0.0;
    double q_hi = h;
    if (std::abs(cot) > 1e-12) {
      // x(q) = x_mid + (q - h/2)·cot must stay inside [0, w].
      double qa = h / 2.0 + (0.0 - x_mid) / cot;
      double qb = h / 2.0 + (w - x_mid) / cot;
      if (qa > qb) std::swap(qa, qb);
      q_lo = std::max(q_lo, qa);
      q_hi = std::min(q_hi, qb);
    }
    LanePolyline lane;
    for (int j = 0; j < kLanePoints; ++j) {
      const double s = static_cast<double>(j) / (kLanePoints - 1);
      const double q = q_lo + s * (q_hi - q_lo);
      double p = x_mid + (q - h / 2.0) * cot;
      if (j != 0 && j != kLanePoints - 1) p += bow * s * (1.0 - s);
      lane.points.push_back({std::clamp(p, 0.0, w), std::clamp(q, 0.0, h)});
    }
    lanes.push_back(std::move(lane));
  }
  return lanes;
}

void rasterize(FrameAnnotation& fr, int width, int height) {
  const auto rows = static_cast<std::size_t>(height);
  const auto cols = static_cast<std::size_t>(width);
  fr.depth = Grid<float>(rows, cols);
  fr.seg = Grid<std::int32_t>(rows, cols, 0);
  for (std::size_t r = 0; r < rows; ++r) {
    const float ground = static_cast<float>(1.0 - (static_cast<double>(r) + 0.5) / height);
    for (std::size_t c = 0; c < cols; ++c) fr.depth.at(r, c) = ground;
  }
  // Far boxes first so nearer ones overwrite them.
  std::vector<const BoundingBox*> order;
  for (const BoundingBox& b : fr.boxes) order.push_back(&b);
  std::stable_sort(order.begin(), order.end(),
                   [](const BoundingBox* a, const BoundingBox* b) { return a->y_min > b->y_min; });
  for (const BoundingBox* b : order) {
    const auto depth = static_cast<float>(std::clamp(1.0 - b->y_min / height, 0.0, 1.0));
    for (std::size_t r = 0; r < rows; ++r) {
      const double yc = static_cast<double>(r) + 0.5;
      if (yc <= b->y_min || yc >= b->y_max) continue;
      for (std::size_t c = 0; c < cols; ++c) {
        const double xc = static_cast<double>(c) + 0.5;
        if (xc <= b->x_min || xc >= b->x_max) continue;
        fr.depth.at(r, c) = depth;
        fr.seg.at(r, c) = b->instance_id;
      }
    }
  }
}

}  // namespace

VideoAnnotation generate_synthetic(const SyntheticSceneSpec& spec) {
  if (spec.n_frames < 2) throw std::invalid_argument("synthetic scene needs at least 2 frames");
  if (spec.lane_count < 2) throw std::invalid_argument("synthetic scene needs at least 2 lanes");
  if (spec.width <= 0 || spec.height <= 0) throw std::invalid_argument("frame size must be positive");
  if (std::abs(spec.lane_curvature) >= 80.0) {
    throw std::invalid_argument("lane_curvature must be below 80 degrees in magnitude");
  }
  if (spec.obstacle_count < 0) throw std::invalid_argument("obstacle_count must be non-negative");
  if (spec.obstacle_speed_min < 0.0 || spec.obstacle_speed_max < spec.obstacle_speed_min) {
    throw std::invalid_argument("obstacle speed range must satisfy 0 <= min <= max");
  }

  Rng rng(derive_seed(spec.rng_seed, Stream::kScene));
  const double w = spec.width;
  const double h = spec.height;

  int next_id = 1;
  std::vector<Obstacle> obstacles;
  for (int j = 0; j < spec.obstacle_count; ++j) {
    obstacles.push_back(spawn(next_id++, 0.0, spec, rng));
    obstacles.back().y_min = rng.uniform(0.45, 1.0) * h;
  }

  VideoAnnotation video;
  video.width = spec.width;
  video.height = spec.height;
  video.frames.reserve(static_cast<std::size_t>(spec.n_frames));
  for (int i = 0; i < spec.n_frames; ++i) {
    FrameAnnotation fr;
    fr.frame_index = i;
    const double drift = spec.lane_curvature * i / (spec.n_frames - 1);
    fr.lanes = make_lanes(spec, 90.0 + drift);

    for (Obstacle& o : obstacles) {
      if (i > 0) o.y_min -= o.speed;
      if (o.y_min + o.height <= 0.0) o = spawn(next_id++, h, spec, rng);
      BoundingBox b;
      b.x_min = std::clamp(o.x_center - o.width / 2.0, 0.0, w);
      b.x_max = std::clamp(o.x_center + o.width / 2.0, 0.0, w);
      b.y_min = std::clamp(o.y_min, 0.0, h);
      b.y_max = std::clamp(o.y_min + o.height, 0.0, h);
      b.instance_id = o.id;
      b.class_tag = ObjectClass::kVehicle;
      if (b.x_max - b.x_min > 0.5 && b.y_max - b.y_min > 0.5) fr.boxes.push_back(b);
    }
    rasterize(fr, spec.width, spec.height);
    video.frames.push_back(std::move(fr));
  }
  return video;
}

}  // namespace vdrive
