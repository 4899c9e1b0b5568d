#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "vdrive/annotation.hpp"
#include "vdrive/geometry.hpp"
#include "vdrive/rng.hpp"

using namespace vdrive;
using nlohmann::json;

namespace {

FrameAnnotation blank_frame(int index, int w, int h) {
  FrameAnnotation f;
  f.frame_index = index;
  f.depth = Grid<float>(static_cast<std::size_t>(h), static_cast<std::size_t>(w), 0.5f);
  f.seg = Grid<std::int32_t>(static_cast<std::size_t>(h), static_cast<std::size_t>(w), 0);
  return f;
}

VideoAnnotation small_video(int frames, int w = 16, int h = 12) {
  VideoAnnotation v;
  v.width = w;
  v.height = h;
  for (int i = 0; i < frames; ++i) {
    FrameAnnotation f = blank_frame(i, w, h);
    f.boxes.push_back({2, 2, 6, 5, 1, ObjectClass::kVehicle});
    for (int r = 2; r < 5; ++r)
      for (int c = 2; c < 6; ++c) f.seg.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = 1;
    f.lanes.push_back({{{4, 0}, {5, 12}}});
    f.lanes.push_back({{{12, 0}, {11, 12}}});
    v.frames.push_back(std::move(f));
  }
  return v;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("vdrive_" + name);
}

}  // namespace

TEST_CASE("writer output round-trips through the loader") {
  const VideoAnnotation v = small_video(3);
  const auto path = temp_file("roundtrip.json");
  save_annotations(v, path);
  const VideoAnnotation back = load_annotations(path);
  CHECK(back.frame_count() == 3);
  CHECK(back == v);
  std::filesystem::remove(path);
}

TEST_CASE("bad box in frame 7 is reported with its frame index") {
  VideoAnnotation v = small_video(9);
  std::swap(v.frames[7].boxes[0].x_min, v.frames[7].boxes[0].x_max);
  json doc = annotations_to_json(v);
  try {
    parse_annotations(doc);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(e.frame() == 7);
    CHECK(std::string(e.what()).find("frame 7") != std::string::npos);
  }
}

TEST_CASE("seg id without a matching box is rejected") {
  VideoAnnotation v = small_video(2);
  v.frames[1].seg.at(0, 0) = 42;
  CHECK_THROWS_AS(validate(v), ValidationError);
  try {
    validate(v);
  } catch (const ValidationError& e) {
    CHECK(e.field() == "seg");
    CHECK(e.frame() == 1);
  }
}

TEST_CASE("schema errors name the frame") {
  json doc = annotations_to_json(small_video(3));
  doc["frames"][2]["boxes"] = "oops";
  try {
    parse_annotations(doc);
    FAIL("expected a schema error");
  } catch (const SchemaError& e) {
    CHECK(e.frame() == 2);
  }
  CHECK_THROWS_AS(parse_annotations(json::parse("[1,2,3]")), SchemaError);
}

TEST_CASE("other invariants are enforced") {
  SUBCASE("non-contiguous frame index") {
    VideoAnnotation v = small_video(3);
    v.frames[2].frame_index = 5;
    CHECK_THROWS_AS(validate(v), ValidationError);
  }
  SUBCASE("depth outside [0, 1]") {
    VideoAnnotation v = small_video(2);
    v.frames[0].depth.at(1, 1) = 1.5f;
    CHECK_THROWS_AS(validate(v), ValidationError);
  }
  SUBCASE("lane with a single point") {
    VideoAnnotation v = small_video(2);
    v.frames[0].lanes[0].points.resize(1);
    CHECK_THROWS_AS(validate(v), ValidationError);
  }
  SUBCASE("lane with coincident points") {
    VideoAnnotation v = small_video(2);
    v.frames[0].lanes[0].points = {{3, 3}, {3, 3}};
    CHECK_THROWS_AS(validate(v), ValidationError);
  }
  SUBCASE("box outside the frame") {
    VideoAnnotation v = small_video(2);
    v.frames[1].boxes[0].x_max = 17;
    CHECK_THROWS_AS(validate(v), ValidationError);
  }
  SUBCASE("grid of the wrong size") {
    VideoAnnotation v = small_video(2);
    v.frames[1].depth = Grid<float>(3, 3, 0.f);
    CHECK_THROWS_AS(validate(v), ValidationError);
  }
}

TEST_CASE("reduced grids are resized to the frame on load") {
  const VideoAnnotation v = small_video(2, 16, 12);
  const json doc = annotations_to_json(v, 6, 8);
  CHECK(doc["grid"][0] == 6);
  CHECK(doc["frames"][0]["depth"].size() == 48u);
  const VideoAnnotation back = parse_annotations(doc);
  CHECK(back.frames[0].depth.rows == 12);
  CHECK(back.frames[0].depth.cols == 16);
  CHECK(back.frames[0].depth.at(5, 5) == doctest::Approx(0.5f));
}

TEST_CASE("resizers preserve constants and mean") {
  Grid<float> g(6, 9, 0.25f);
  CHECK(resize_bilinear(g, 4, 3) == Grid<float>(4, 3, 0.25f));
  CHECK(resize_area(g, 3, 3) == Grid<float>(3, 3, 0.25f));
  Rng rng(2);
  Grid<float> r(8, 8);
  double mean = 0.0;
  for (float& x : r.data) mean += (x = static_cast<float>(rng.uniform()));
  const Grid<float> a = resize_area(r, 4, 4);
  double mean_a = 0.0;
  for (float x : a.data) mean_a += x;
  CHECK(mean_a / 16.0 == doctest::Approx(mean / 64.0).epsilon(1e-6));
  Grid<std::int32_t> s(4, 4, 0);
  s.at(3, 3) = 7;
  CHECK(resize_nearest(s, 8, 8).at(7, 7) == 7);
}

TEST_CASE("chunk_video examples") {
  VideoAnnotation v;
  v.frames.resize(1800);
  CHECK(chunk_video(v, 100, 100).size() == 18);
  v.frames.resize(983);
  const auto c = chunk_video(v, 100, 50);
  CHECK(c.size() == 18);
  CHECK(c.back().start == 850);
  v.frames.resize(100);
  const auto one = chunk_video(v, 100, 100);
  REQUIRE(one.size() == 1);
  CHECK(one[0].start == 0);
  CHECK(one[0].length == 100);
}

TEST_CASE("chunk_video count formula over random triples") {
  Rng rng(5);
  VideoAnnotation v;
  for (int t = 0; t < 300; ++t) {
    const int n = 2 + static_cast<int>(rng.index(400));
    const int window = 2 + static_cast<int>(rng.index(static_cast<std::size_t>(n - 1)));
    const int stride = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(window)));
    v.frames.resize(static_cast<std::size_t>(n));
    const auto chunks = chunk_video(v, window, stride);
    CHECK(static_cast<int>(chunks.size()) == (n - window) / stride + 1);
    for (std::size_t k = 0; k < chunks.size(); ++k) {
      CHECK(chunks[k].start == static_cast<int>(k) * stride);
      CHECK(chunks[k].start + chunks[k].length <= n);
      CHECK(chunks[k].id == static_cast<int>(k));
    }
  }
}

TEST_CASE("chunk_video rejects bad window and stride") {
  VideoAnnotation v;
  v.frames.resize(50);
  CHECK_THROWS_AS(chunk_video(v, 100, 10), std::invalid_argument);
  CHECK_THROWS_AS(chunk_video(v, 20, 0), std::invalid_argument);
  CHECK_THROWS_AS(chunk_video(v, 20, 21), std::invalid_argument);
}

TEST_CASE("split_chunks partitions deterministically") {
  VideoAnnotation v;
  v.frames.resize(1800);
  const auto chunks = chunk_video(v, 100, 100);
  const ChunkSplit a = split_chunks(chunks, 0.5, 9);
  const ChunkSplit b = split_chunks(chunks, 0.5, 9);
  CHECK(a.train.size() == 9);
  CHECK(a.test.size() == 9);
  std::set<int> ids;
  for (const Chunk& c : a.train) ids.insert(c.id);
  for (const Chunk& c : a.test) CHECK(ids.insert(c.id).second);
  CHECK(ids.size() == 18);
  REQUIRE(a.train.size() == b.train.size());
  for (std::size_t i = 0; i < a.train.size(); ++i) CHECK(a.train[i].id == b.train[i].id);

  v.frames.resize(300);
  const auto three = chunk_video(v, 100, 100);
  const ChunkSplit s = split_chunks(three, 0.9, 1);
  CHECK(s.train.size() == 2);
  CHECK(s.test.size() == 1);
  CHECK_THROWS_AS(split_chunks(std::span<const Chunk>(three.data(), 1), 0.5, 1), std::invalid_argument);
  CHECK_THROWS_AS(split_chunks(three, 1.0, 1), std::invalid_argument);
}

TEST_CASE("split_chunks is a disjoint cover for random inputs") {
  Rng rng(8);
  VideoAnnotation v;
  for (int t = 0; t < 100; ++t) {
    v.frames.resize(2 + rng.index(300));
    const int window = 2;
    const auto chunks = chunk_video(v, window, 1 + static_cast<int>(rng.index(2)));
    if (chunks.size() < 2) continue;
    const ChunkSplit s = split_chunks(chunks, rng.uniform(0.05, 0.95), rng.next());
    CHECK(!s.train.empty());
    CHECK(!s.test.empty());
    std::set<int> ids;
    for (const Chunk& c : s.train) ids.insert(c.id);
    for (const Chunk& c : s.test) CHECK(ids.insert(c.id).second);
    CHECK(ids.size() == chunks.size());
  }
}

TEST_CASE("synthetic scenes are deterministic and valid") {
  SyntheticSceneSpec spec;
  spec.n_frames = 40;
  const VideoAnnotation a = generate_synthetic(spec);
  const VideoAnnotation b = generate_synthetic(spec);
  CHECK(annotations_to_json(a).dump() == annotations_to_json(b).dump());
  CHECK_NOTHROW(validate(a));
  spec.rng_seed = 2;
  CHECK(!(generate_synthetic(spec) == a));
}

TEST_CASE("straight synthetic lanes average 90 degrees") {
  SyntheticSceneSpec spec;
  spec.n_frames = 30;
  const VideoAnnotation v = generate_synthetic(spec);
  for (const FrameAnnotation& f : v.frames) {
    CHECK(frame_lane_stats(f.lanes, v.width).theta_lane == doctest::Approx(90.0).epsilon(0.5 / 90.0));
  }
}

TEST_CASE("curved synthetic lanes drift by the requested total") {
  SyntheticSceneSpec spec;
  spec.n_frames = 30;
  spec.lane_curvature = 20.0;
  const VideoAnnotation v = generate_synthetic(spec);
  CHECK_NOTHROW(validate(v));
  const double first = frame_lane_stats(v.frames.front().lanes, v.width).theta_lane;
  const double last = frame_lane_stats(v.frames.back().lanes, v.width).theta_lane;
  CHECK(first == doctest::Approx(90.0).epsilon(1e-6));
  CHECK(last - first == doctest::Approx(20.0).epsilon(0.05));
}

TEST_CASE("obstacle-free scenes never overlap the agent") {
  SyntheticSceneSpec spec;
  spec.n_frames = 20;
  spec.obstacle_count = 0;
  const VideoAnnotation v = generate_synthetic(spec);
  Rng rng(4);
  for (const FrameAnnotation& f : v.frames) {
    CHECK(f.boxes.empty());
    const AgentPose pose{rng.uniform(0, 224), 22.4, 90.0, 33.6, 33.6};
    CHECK(max_intersection(pose, f.boxes) == 0.0);
  }
}

TEST_CASE("synthetic depth falls with height and seg marks obstacles") {
  SyntheticSceneSpec spec;
  spec.n_frames = 5;
  const VideoAnnotation v = generate_synthetic(spec);
  const FrameAnnotation& f = v.frames[0];
  std::size_t col = 0;  // a column free of obstacles in this frame
  for (std::size_t c = 0; c < f.seg.cols; ++c) {
    bool clear = true;
    for (std::size_t r = 0; r < f.seg.rows; ++r) clear = clear && f.seg.at(r, c) == 0;
    if (clear) {
      col = c;
      break;
    }
  }
  for (std::size_t r = 1; r < f.depth.rows; ++r) CHECK(f.depth.at(r, col) < f.depth.at(r - 1, col));
  std::size_t marked = 0;
  for (auto id : f.seg.data) marked += id != 0;
  CHECK(marked > 0);
}

TEST_CASE("generator rejects bad specs") {
  SyntheticSceneSpec spec;
  spec.lane_count = 1;
  CHECK_THROWS_AS(generate_synthetic(spec), std::invalid_argument);
  spec = {};
  spec.obstacle_speed_min = 3;
  spec.obstacle_speed_max = 1;
  CHECK_THROWS_AS(generate_synthetic(spec), std::invalid_argument);
}
