#pragma once

// Per-frame scene annotations (boxes, lanes, depth, segmentation) that stand
// in for perception-model outputs, plus chunking of a video into short
// episodes.
//
// Coordinates are in pixels with the origin at the bottom-left corner and y
// increasing upward. Grid row 0 is the bottom row of the frame.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace vdrive {

enum class ObjectClass : int { kVehicle = 0, kPedestrian = 1, kOther = 2 };

struct BoundingBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;
  int instance_id = 0;
  ObjectClass class_tag = ObjectClass::kVehicle;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }

  bool operator==(const BoundingBox&) const = default;
};

struct LanePoint {
  double p = 0.0;
  double q = 0.0;

  bool operator==(const LanePoint&) const = default;
};

struct LanePolyline {
  std::vector<LanePoint> points;

  bool operator==(const LanePolyline&) const = default;
};

template <typename T>
struct Grid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> data;

  Grid() = default;
  Grid(std::size_t r, std::size_t c, T fill = T{}) : rows(r), cols(c), data(r * c, fill) {}

  T& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  const T& at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  bool operator==(const Grid&) const = default;
};

struct FrameAnnotation {
  int frame_index = 0;
  std::vector<BoundingBox> boxes;
  std::vector<LanePolyline> lanes;
  Grid<float> depth;        // [0,1], 1 = nearest
  Grid<std::int32_t> seg;   // 0 = background, otherwise an instance_id

  bool operator==(const FrameAnnotation&) const = default;
};

/// Immutable once loaded; environments share it read-only.
struct VideoAnnotation {
  int width = 224;
  int height = 224;
  std::vector<FrameAnnotation> frames;

  int frame_count() const { return static_cast<int>(frames.size()); }

  bool operator==(const VideoAnnotation&) const = default;
};

struct Chunk {
  const VideoAnnotation* video = nullptr;
  int id = 0;  // ordinal within the chunk_video output
  int start = 0;
  int length = 0;
};

class AnnotationError : public std::runtime_error {
 public:
  AnnotationError(const std::string& what, int frame)
      : std::runtime_error(what), frame_(frame) {}
  /// Offending frame, or -1 when the problem is not frame-specific.
  int frame() const { return frame_; }

 private:
  int frame_;
};

/// The document does not have the expected JSON shape.
class SchemaError : public AnnotationError {
 public:
  using AnnotationError::AnnotationError;
};

/// The document parses but breaks a data invariant.
class ValidationError : public AnnotationError {
 public:
  ValidationError(const std::string& what, int frame, std::string field)
      : AnnotationError(what, frame), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Checks every invariant of the annotation types; throws ValidationError.
void validate(const VideoAnnotation& video);

VideoAnnotation parse_annotations(const nlohmann::json& doc);
VideoAnnotation load_annotations(const std::filesystem::path& path);

/// Serializes with depth/seg stored at grid_rows × grid_cols (0 = full size).
/// Depth is area-averaged and seg nearest-sampled when reduced.
nlohmann::json annotations_to_json(const VideoAnnotation& video, std::size_t grid_rows = 0,
                                   std::size_t grid_cols = 0);
void save_annotations(const VideoAnnotation& video, const std::filesystem::path& path,
                      std::size_t grid_rows = 0, std::size_t grid_cols = 0);

Grid<float> resize_bilinear(const Grid<float>& src, std::size_t rows, std::size_t cols);
Grid<float> resize_area(const Grid<float>& src, std::size_t rows, std::size_t cols);
Grid<std::int32_t> resize_nearest(const Grid<std::int32_t>& src, std::size_t rows,
                                  std::size_t cols);

struct SyntheticSceneSpec {
  int n_frames = 200;
  int width = 224;
  int height = 224;
  int lane_count = 3;
  double lane_curvature = 0.0;  // total heading drift over the video, degrees
  int obstacle_count = 2;
  double obstacle_speed_min = 1.0;  // px/frame toward the camera
  double obstacle_speed_max = 3.0;
  std::uint64_t rng_seed = 1;
};

/// Deterministic in spec.rng_seed. Throws std::invalid_argument on a bad spec.
VideoAnnotation generate_synthetic(const SyntheticSceneSpec& spec);

/// Sliding windows at starts 0, stride, 2·stride, … with start+window ≤ N.
std::vector<Chunk> chunk_video(const VideoAnnotation& video, int window, int stride);

struct ChunkSplit {
  std::vector<Chunk> train;
  std::vector<Chunk> test;
};

/// Shuffled partition with round(fraction·n) train chunks, clamped so that
/// neither side is empty.
ChunkSplit split_chunks(std::span<const Chunk> chunks, double train_fraction,
                        std::uint64_t seed);

}  // namespace vdrive
