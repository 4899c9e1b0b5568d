#include "vdrive/annotation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "vdrive/rng.hpp"

namespace vdrive {

namespace {

using nlohmann::json;

std::string frame_prefix(int frame) { return "frame " + std::to_string(frame) + ": "; }

[[noreturn]] void invalid(int frame, const std::string& field, const std::string& msg) {
  throw ValidationError(frame_prefix(frame) + field + " " + msg, frame, field);
}

void validate_box(const BoundingBox& b, int frame, int w, int h) {
  if (!(b.x_min < b.x_max)) invalid(frame, "x_min", "must be less than x_max");
  if (!(b.y_min < b.y_max)) invalid(frame, "y_min", "must be less than y_max");
  if (b.x_min < 0.0 || b.x_max > w) invalid(frame, "x_max", "outside [0, w]");
  if (b.y_min < 0.0 || b.y_max > h) invalid(frame, "y_max", "outside [0, h]");
  if (b.instance_id <= 0) invalid(frame, "instance_id", "must be positive");
  const int cls = static_cast<int>(b.class_tag);
  if (cls < 0 || cls > 2) invalid(frame, "class", "unknown class tag");
}

void validate_lane(const LanePolyline& lane, int frame, int w, int h) {
  if (lane.points.size() < 2) invalid(frame, "lanes", "needs at least two points");
  bool distinct = false;
  for (const LanePoint& pt : lane.points) {
    if (!std::isfinite(pt.p) || !std::isfinite(pt.q) || pt.p < 0.0 || pt.p > w || pt.q < 0.0 ||
        pt.q > h) {
      invalid(frame, "lanes", "point outside the frame");
    }
    if (pt != lane.points.front()) distinct = true;
  }
  if (!distinct) invalid(frame, "lanes", "needs two distinct points");
}

}  // namespace

void validate(const VideoAnnotation& video) {
  if (video.width <= 0 || video.height <= 0) {
    throw ValidationError("frame size must be positive", -1, "w");
  }
  const auto rows = static_cast<std::size_t>(video.height);
  const auto cols = static_cast<std::size_t>(video.width);
  for (std::size_t k = 0; k < video.frames.size(); ++k) {
    const FrameAnnotation& fr = video.frames[k];
    const int f = static_cast<int>(k);
    if (fr.frame_index != f) invalid(f, "i", "frame indices must be contiguous from 0");
    std::set<int> ids;
    for (const BoundingBox& b : fr.boxes) {
      validate_box(b, f, video.width, video.height);
      ids.insert(b.instance_id);
    }
    for (const LanePolyline& lane : fr.lanes) validate_lane(lane, f, video.width, video.height);
    if (fr.depth.rows != rows || fr.depth.cols != cols || fr.depth.data.size() != rows * cols) {
      invalid(f, "depth", "grid dimensions differ from the frame size");
    }
    if (fr.seg.rows != rows || fr.seg.cols != cols || fr.seg.data.size() != rows * cols) {
      invalid(f, "seg", "grid dimensions differ from the frame size");
    }
    for (float d : fr.depth.data) {
      if (!(d >= 0.0f && d <= 1.0f)) invalid(f, "depth", "value outside [0, 1]");
    }
    for (std::int32_t s : fr.seg.data) {
      if (s != 0 && ids.count(s) == 0) {
        invalid(f, "seg", "instance id " + std::to_string(s) + " has no bounding box");
      }
    }
  }
}

Grid<float> resize_bilinear(const Grid<float>& src, std::size_t rows, std::size_t cols) {
  if (src.rows == rows && src.cols == cols) return src;
  Grid<float> out(rows, cols);
  const double sy = static_cast<double>(src.rows) / static_cast<double>(rows);
  const double sx = static_cast<double>(src.cols) / static_cast<double>(cols);
  for (std::size_t r = 0; r < rows; ++r) {
    double y = (static_cast<double>(r) + 0.5) * sy - 0.5;
    y = std::clamp(y, 0.0, static_cast<double>(src.rows - 1));
    const auto y0 = static_cast<std::size_t>(y);
    const std::size_t y1 = std::min(y0 + 1, src.rows - 1);
    const double ty = y - static_cast<double>(y0);
    for (std::size_t c = 0; c < cols; ++c) {
      double x = (static_cast<double>(c) + 0.5) * sx - 0.5;
      x = std::clamp(x, 0.0, static_cast<double>(src.cols - 1));
      const auto x0 = static_cast<std::size_t>(x);
      const std::size_t x1 = std::min(x0 + 1, src.cols - 1);
      const double tx = x - static_cast<double>(x0);
      const double top = src.at(y0, x0) * (1.0 - tx) + src.at(y0, x1) * tx;
      const double bot = src.at(y1, x0) * (1.0 - tx) + src.at(y1, x1) * tx;
      out.at(r, c) = static_cast<float>(top * (1.0 - ty) + bot * ty);
    }
  }
  return out;
}

Grid<float> resize_area(const Grid<float>& src, std::size_t rows, std::size_t cols) {
  if (src.rows == rows && src.cols == cols) return src;
  Grid<float> out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t r0 = r * src.rows / rows;
    const std::size_t r1 = std::max(r0 + 1, (r + 1) * src.rows / rows);
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t c0 = c * src.cols / cols;
      const std::size_t c1 = std::max(c0 + 1, (c + 1) * src.cols / cols);
      double acc = 0.0;
      for (std::size_t y = r0; y < r1; ++y) {
        for (std::size_t x = c0; x < c1; ++x) acc += src.at(y, x);
      }
      out.at(r, c) = static_cast<float>(acc / static_cast<double>((r1 - r0) * (c1 - c0)));
    }
  }
  return out;
}

Grid<std::int32_t> resize_nearest(const Grid<std::int32_t>& src, std::size_t rows,
                                  std::size_t cols) {
  if (src.rows == rows && src.cols == cols) return src;
  Grid<std::int32_t> out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t y = std::min(src.rows - 1, (2 * r + 1) * src.rows / (2 * rows));
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t x = std::min(src.cols - 1, (2 * c + 1) * src.cols / (2 * cols));
      out.at(r, c) = src.at(y, x);
    }
  }
  return out;
}

namespace {

int as_int(const json& j, int frame, const char* what) {
  if (!j.is_number()) throw SchemaError(frame_prefix(frame) + what + " must be a number", frame);
  const double v = j.get<double>();
  if (v != std::floor(v)) throw SchemaError(frame_prefix(frame) + what + " must be an integer", frame);
  return static_cast<int>(v);
}

double as_real(const json& j, int frame, const char* what) {
  if (!j.is_number()) throw SchemaError(frame_prefix(frame) + what + " must be a number", frame);
  return j.get<double>();
}

const json& require(const json& obj, const char* key, int frame) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw SchemaError(frame_prefix(frame) + "missing key \"" + key + "\"", frame);
  }
  return obj.at(key);
}

FrameAnnotation parse_frame(const json& jf, int frame, std::size_t grid_rows,
                            std::size_t grid_cols, std::size_t rows, std::size_t cols) {
  FrameAnnotation fr;
  fr.frame_index = as_int(require(jf, "i", frame), frame, "i");

  const json& boxes = require(jf, "boxes", frame);
  if (!boxes.is_array()) throw SchemaError(frame_prefix(frame) + "boxes must be an array", frame);
  for (const json& jb : boxes) {
    if (!jb.is_array() || jb.size() != 6) {
      throw SchemaError(frame_prefix(frame) + "box must be [x0,y0,x1,y1,id,class]", frame);
    }
    BoundingBox b;
    b.x_min = as_real(jb[0], frame, "box x0");
    b.y_min = as_real(jb[1], frame, "box y0");
    b.x_max = as_real(jb[2], frame, "box x1");
    b.y_max = as_real(jb[3], frame, "box y1");
    b.instance_id = as_int(jb[4], frame, "box id");
    b.class_tag = static_cast<ObjectClass>(as_int(jb[5], frame, "box class"));
    fr.boxes.push_back(b);
  }

  const json& lanes = require(jf, "lanes", frame);
  if (!lanes.is_array()) throw SchemaError(frame_prefix(frame) + "lanes must be an array", frame);
  for (const json& jl : lanes) {
    if (!jl.is_array()) throw SchemaError(frame_prefix(frame) + "lane must be an array", frame);
    LanePolyline lane;
    for (const json& jp : jl) {
      if (!jp.is_array() || jp.size() != 2) {
        throw SchemaError(frame_prefix(frame) + "lane point must be [p,q]", frame);
      }
      lane.points.push_back({as_real(jp[0], frame, "lane p"), as_real(jp[1], frame, "lane q")});
    }
    fr.lanes.push_back(std::move(lane));
  }

  const json& depth = require(jf, "depth", frame);
  const json& seg = require(jf, "seg", frame);
  if (!depth.is_array() || depth.size() != grid_rows * grid_cols) {
    throw SchemaError(frame_prefix(frame) + "depth must hold grid_h*grid_w values", frame);
  }
  if (!seg.is_array() || seg.size() != grid_rows * grid_cols) {
    throw SchemaError(frame_prefix(frame) + "seg must hold grid_h*grid_w values", frame);
  }
  Grid<float> d(grid_rows, grid_cols);
  Grid<std::int32_t> s(grid_rows, grid_cols);
  for (std::size_t k = 0; k < d.data.size(); ++k) {
    d.data[k] = static_cast<float>(as_real(depth[k], frame, "depth"));
    s.data[k] = as_int(seg[k], frame, "seg");
  }
  fr.depth = resize_bilinear(d, rows, cols);
  fr.seg = resize_nearest(s, rows, cols);
  return fr;
}

}  // namespace

VideoAnnotation parse_annotations(const json& doc) {
  VideoAnnotation video;
  video.width = as_int(require(doc, "w", -1), -1, "w");
  video.height = as_int(require(doc, "h", -1), -1, "h");
  if (video.width <= 0 || video.height <= 0) {
    throw ValidationError("frame size must be positive", -1, "w");
  }
  const auto rows = static_cast<std::size_t>(video.height);
  const auto cols = static_cast<std::size_t>(video.width);
  std::size_t grid_rows = rows;
  std::size_t grid_cols = cols;
  if (doc.contains("grid")) {
    const json& g = doc.at("grid");
    if (!g.is_array() || g.size() != 2) throw SchemaError("grid must be [grid_h, grid_w]", -1);
    const int gh = as_int(g[0], -1, "grid_h");
    const int gw = as_int(g[1], -1, "grid_w");
    if (gh <= 0 || gw <= 0) throw SchemaError("grid dimensions must be positive", -1);
    grid_rows = static_cast<std::size_t>(gh);
    grid_cols = static_cast<std::size_t>(gw);
  }
  const json& frames = require(doc, "frames", -1);
  if (!frames.is_array()) throw SchemaError("frames must be an array", -1);
  video.frames.reserve(frames.size());
  for (std::size_t k = 0; k < frames.size(); ++k) {
    video.frames.push_back(
        parse_frame(frames[k], static_cast<int>(k), grid_rows, grid_cols, rows, cols));
  }
  validate(video);
  return video;
}

VideoAnnotation load_annotations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open annotation file " + path.string(), -1);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("annotation file is not valid JSON: ") + e.what(), -1);
  }
  return parse_annotations(doc);
}

json annotations_to_json(const VideoAnnotation& video, std::size_t grid_rows,
                         std::size_t grid_cols) {
  if (grid_rows == 0) grid_rows = static_cast<std::size_t>(video.height);
  if (grid_cols == 0) grid_cols = static_cast<std::size_t>(video.width);
  json doc;
  doc["w"] = video.width;
  doc["h"] = video.height;
  doc["grid"] = {grid_rows, grid_cols};
  json frames = json::array();
  for (const FrameAnnotation& fr : video.frames) {
    json jf;
    jf["i"] = fr.frame_index;
    json boxes = json::array();
    for (const BoundingBox& b : fr.boxes) {
      boxes.push_back({b.x_min, b.y_min, b.x_max, b.y_max, b.instance_id,
                       static_cast<int>(b.class_tag)});
    }
    jf["boxes"] = std::move(boxes);
    json lanes = json::array();
    for (const LanePolyline& lane : fr.lanes) {
      json jl = json::array();
      for (const LanePoint& pt : lane.points) jl.push_back({pt.p, pt.q});
      lanes.push_back(std::move(jl));
    }
    jf["lanes"] = std::move(lanes);
    jf["depth"] = resize_area(fr.depth, grid_rows, grid_cols).data;
    jf["seg"] = resize_nearest(fr.seg, grid_rows, grid_cols).data;
    frames.push_back(std::move(jf));
  }
  doc["frames"] = std::move(frames);
  return doc;
}

void save_annotations(const VideoAnnotation& video, const std::filesystem::path& path,
                      std::size_t grid_rows, std::size_t grid_cols) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write annotation file " + path.string());
  out << annotations_to_json(video, grid_rows, grid_cols).dump() << '\n';
}

std::vector<Chunk> chunk_video(const VideoAnnotation& video, int window, int stride) {
  const int n = video.frame_count();
  if (stride <= 0 || stride > window || window > n || window < 2) {
    throw std::invalid_argument("chunk_video requires 0 < stride <= window <= frame count and window >= 2");
  }
  std::vector<Chunk> chunks;
  for (int start = 0; start + window <= n; start += stride) {
    chunks.push_back(Chunk{&video, static_cast<int>(chunks.size()), start, window});
  }
  return chunks;
}

ChunkSplit split_chunks(std::span<const Chunk> chunks, double train_fraction,
                        std::uint64_t seed) {
  if (chunks.size() < 2) throw std::invalid_argument("split_chunks needs at least two chunks");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("train_fraction must lie in (0, 1)");
  }
  const std::size_t n = chunks.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.index(i + 1)]);

  const auto rounded = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n) + 0.5));
  const std::size_t n_train = std::clamp<std::size_t>(rounded, 1, n - 1);
  std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::sort(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());

  ChunkSplit split;
  for (std::size_t k = 0; k < n; ++k) {
    (k < n_train ? split.train : split.test).push_back(chunks[order[k]]);
  }
  return split;
}

}  // namespace vdrive
