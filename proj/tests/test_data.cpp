#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "idpr/augment.hpp"
#include "idpr/dataset.hpp"
#include "idpr/error.hpp"
#include "idpr/image_io.hpp"
#include "idpr/synth.hpp"

using namespace idpr;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("idpr-data-test-" + std::to_string(std::rand()) + "-" +
            std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_SUITE("data") {

TEST_CASE("annotation files load records with and without poses") {
  TempDir dir;
  Image a(6, 5, 0.25);
  a(2, 2) = 1.0;
  save_image(a, (dir.path / "a.png").string());
  Image b(6, 5, 0.75);
  save_image(b, (dir.path / "b.png").string());

  write_text(dir.path / "train.jsonl",
             R"({"id": "a", "image_path": "a.png", "joints": [[1.0, 2.0], [4.0, 3.5]]})"
             "\n"
             R"({"id": "b", "image_path": "b.png", "joints": null})"
             "\n");

  const auto records = load_dataset((dir.path / "train.jsonl").string(), 2);
  REQUIRE(records.size() == 2);
  CHECK(records[0].id == "a");
  REQUIRE(records[0].pose.has_value());
  CHECK(records[0].pose->joints[0].x == 1.0);
  CHECK(records[0].pose->joints[1].y == 3.5);
  CHECK(records[0].image.width() == 6);
  CHECK(records[0].image(2, 2) == doctest::Approx(1.0).epsilon(0.01));
  CHECK(records[1].id == "b");
  CHECK(!records[1].pose.has_value());
}

TEST_CASE("joint-count violations name the offending record") {
  TempDir dir;
  save_image(Image(6, 5, 0.5), (dir.path / "a.png").string());
  write_text(dir.path / "bad.jsonl",
             R"({"id": "short", "image_path": "a.png", "joints": [[1, 2]]})"
             "\n");
  try {
    load_dataset((dir.path / "bad.jsonl").string(), 3);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string what = e.what();
    CHECK(what.find("short") != std::string::npos);
  }
}

TEST_CASE("malformed lines raise line-numbered errors") {
  TempDir dir;
  save_image(Image(6, 5, 0.5), (dir.path / "a.png").string());
  write_text(dir.path / "bad.jsonl",
             R"({"id": "ok", "image_path": "a.png", "joints": null})"
             "\n"
             "{this is not json\n");
  try {
    load_dataset((dir.path / "bad.jsonl").string());
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
}

TEST_CASE("records with out-of-bounds joints are excluded with a warning") {
  TempDir dir;
  save_image(Image(6, 5, 0.5), (dir.path / "a.png").string());
  save_image(Image(6, 5, 0.5), (dir.path / "b.png").string());
  write_text(dir.path / "train.jsonl",
             R"({"id": "in", "image_path": "a.png", "joints": [[1, 1], [5, 4]]})"
             "\n"
             R"({"id": "out", "image_path": "b.png", "joints": [[1, 1], [7, 2]]})"
             "\n");
  const auto records = load_dataset((dir.path / "train.jsonl").string(), 2);
  REQUIRE(records.size() == 1);
  CHECK(records[0].id == "in");
}

TEST_CASE("saving and reloading keeps ids, poses, and pixels") {
  TempDir dir;
  std::vector<AnnotatedImage> instances(2);
  instances[0].id = "first";
  instances[0].image = Image(8, 6, 0.5);
  instances[0].image(3, 2) = 0.125;
  Pose pose;
  pose.joints = {{1.0, 1.0}, {6.5, 4.25}};
  instances[0].pose = pose;
  instances[0].torso_box = {{1.0, 1.0, 6.5, 4.25}};
  instances[1].id = "second";
  instances[1].image = Image(8, 6, 0.25);

  const std::string ann = (dir.path / "set.jsonl").string();
  save_dataset(instances, ann, (dir.path / "img").string());
  const auto loaded = load_dataset(ann);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].id == "first");
  REQUIRE(loaded[0].pose.has_value());
  CHECK(loaded[0].pose->joints[1].x == doctest::Approx(6.5));
  CHECK(loaded[0].pose->joints[1].y == doctest::Approx(4.25));
  REQUIRE(loaded[0].torso_box.has_value());
  CHECK((*loaded[0].torso_box)[2] == doctest::Approx(6.5));
  CHECK(loaded[0].image(3, 2) == doctest::Approx(0.125).epsilon(0.01));
  CHECK(!loaded[1].pose.has_value());
  CHECK(loaded[1].image.width() == 8);
}

TEST_CASE("right-angle rotations produce four exact copies") {
  const PartGraph graph(2, {{0, 1}}, 0);
  AnnotatedImage inst;
  inst.id = "x";
  inst.image = Image(21, 21, 0.2);
  Pose pose;
  pose.joints = {{10.0, 10.0}, {14.0, 10.0}};
  inst.pose = pose;

  AugmentStats stats;
  const auto out = augment({inst}, 90.0, false, graph, &stats);
  CHECK(stats.produced == 4);
  CHECK(stats.dropped == 0);
  REQUIRE(out.size() == 4);

  // One copy must place part 1 four pixels *up* from the center: the
  // (1, 0) offset rotated by 90 degrees lands on (0, -1) in image
  // coordinates for a counter-clockwise rotation, or (0, 1) for clockwise;
  // accept either convention but require both axes to appear.
  int axis_aligned = 0;
  for (const AnnotatedImage& copy : out) {
    const Vec2 d = copy.pose->joints[1] - copy.pose->joints[0];
    if (std::abs(std::abs(d.x) - 4.0) < 1e-9 && std::abs(d.y) < 1e-9) {
      ++axis_aligned;
    }
    if (std::abs(std::abs(d.y) - 4.0) < 1e-9 && std::abs(d.x) < 1e-9) {
      ++axis_aligned;
    }
  }
  CHECK(axis_aligned == 4);
}

TEST_CASE("rotation preserves limb lengths exactly") {
  const PartGraph graph(3, {{0, 1}, {1, 2}}, 0);
  AnnotatedImage inst;
  inst.image = Image(31, 31, 0.3);
  Pose pose;
  pose.joints = {{15.0, 15.0}, {19.0, 12.0}, {21.0, 17.0}};
  inst.pose = pose;

  const auto out = augment({inst}, 45.0, false, graph, nullptr);
  REQUIRE(out.size() == 8);
  for (const AnnotatedImage& copy : out) {
    for (const auto& [a, b] : graph.edges()) {
      const double original =
          distance(pose.joints[a], pose.joints[b]);
      const double rotated =
          distance(copy.pose->joints[a], copy.pose->joints[b]);
      CHECK(rotated == doctest::Approx(original).epsilon(1e-6));
    }
  }
}

TEST_CASE("flipping swaps the declared left-right part pairs") {
  const PartGraph graph(3, {{0, 1}, {0, 2}}, 0, {"torso", "left", "right"},
                        {{1, 2}});
  AnnotatedImage inst;
  inst.image = Image(21, 21, 0.4);
  Pose pose;
  pose.joints = {{10.0, 10.0}, {6.0, 14.0}, {14.0, 14.0}};
  inst.pose = pose;

  const auto out = augment({inst}, 360.0, true, graph, nullptr);
  REQUIRE(out.size() == 2);  // identity + flipped
  const auto flipped_it =
      std::find_if(out.begin(), out.end(), [](const AnnotatedImage& c) {
        return c.id.size() >= 2 && c.id.substr(c.id.size() - 2) == "_f";
      });
  REQUIRE(flipped_it != out.end());
  const Pose& flipped = *flipped_it->pose;
  // The flipped "left" part must sit where the original "right" was,
  // mirrored about the image's vertical center line (x -> width-1-x).
  CHECK(flipped.joints[1].x == doctest::Approx(20.0 - 14.0));
  CHECK(flipped.joints[1].y == doctest::Approx(14.0));
  CHECK(flipped.joints[2].x == doctest::Approx(20.0 - 6.0));
  CHECK(flipped.joints[0].x == doctest::Approx(10.0));
}

TEST_CASE("copies that rotate out of the frame are dropped and counted") {
  const PartGraph graph(2, {{0, 1}}, 0);
  AnnotatedImage inst;
  inst.image = Image(20, 6, 0.1);
  Pose pose;
  pose.joints = {{2.0, 3.0}, {18.0, 3.0}};  // long horizontal limb
  inst.pose = pose;

  AugmentStats stats;
  const auto out = augment({inst}, 90.0, false, graph, &stats);
  // Rotating the long limb to vertical cannot fit a 6-pixel-tall image.
  CHECK(stats.dropped > 0);
  CHECK(stats.produced == static_cast<int>(out.size()));
  CHECK(out.size() < 4);
  for (const AnnotatedImage& copy : out) {
    for (const Vec2& j : copy.pose->joints) {
      CHECK(j.x >= 0.0);
      CHECK(j.x < 20.0);
      CHECK(j.y >= 0.0);
      CHECK(j.y < 6.0);
    }
  }
}

TEST_CASE("midpoint parts double the resolution of every edge") {
  const PartGraph base(3, {{0, 1}, {1, 2}}, 0);
  Pose pose;
  pose.joints = {{0.0, 0.0}, {10.0, 0.0}, {10.0, 8.0}};
  const auto [expanded, graph] = add_midway_parts(pose, base);

  CHECK(graph.num_parts() == 5);
  CHECK(expanded.size() == 5);
  // Edge 0 midpoint is part 3, edge 1 midpoint is part 4.
  CHECK(expanded.joints[3].x == doctest::Approx(5.0));
  CHECK(expanded.joints[3].y == doctest::Approx(0.0));
  CHECK(expanded.joints[4].x == doctest::Approx(10.0));
  CHECK(expanded.joints[4].y == doctest::Approx(4.0));
  // Original joints keep their indices and positions.
  for (int i = 0; i < 3; ++i) {
    CHECK(expanded.joints[i].x == pose.joints[i].x);
    CHECK(expanded.joints[i].y == pose.joints[i].y);
  }
  CHECK_NOTHROW(validate_graph(graph));
  // The expanded tree contains (i, mid) and (mid, j) for every old edge.
  CHECK(graph.edge_index(0, 3) >= 0);
  CHECK(graph.edge_index(3, 1) >= 0);
  CHECK(graph.edge_index(1, 4) >= 0);
  CHECK(graph.edge_index(4, 2) >= 0);
}

TEST_CASE("synthetic datasets are byte-identical across runs") {
  TempDir dir;
  SynthConfig config;
  config.num_positives = 4;
  config.num_negatives = 2;
  config.width = 24;
  config.height = 24;
  config.num_parts = 3;
  config.seed = 12345;

  const auto first = synth_stickfigures(config);
  const auto second = synth_stickfigures(config);
  REQUIRE(first.first.size() == 4);
  REQUIRE(first.second.size() == 2);

  const fs::path dir_a = dir.path / "a";
  const fs::path dir_b = dir.path / "b";
  fs::create_directories(dir_a);
  fs::create_directories(dir_b);
  save_dataset(first.first, (dir_a / "train.jsonl").string(),
               (dir_a / "img").string());
  save_dataset(second.first, (dir_b / "train.jsonl").string(),
               (dir_b / "img").string());
  CHECK(read_bytes(dir_a / "train.jsonl") == read_bytes(dir_b / "train.jsonl"));
  for (const AnnotatedImage& inst : first.first) {
    const std::string name = inst.id + ".png";
    CHECK(read_bytes(dir_a / "img" / name) == read_bytes(dir_b / "img" / name));
  }
}

TEST_CASE("synthetic joints stay inside the frame") {
  SynthConfig config;
  config.num_positives = 30;
  config.num_negatives = 0;
  config.width = 24;
  config.height = 20;
  config.num_parts = 4;
  config.seed = 9;
  const auto [positives, negatives] = synth_stickfigures(config);
  REQUIRE(positives.size() == 30);
  for (const AnnotatedImage& inst : positives) {
    REQUIRE(inst.pose.has_value());
    CHECK(inst.pose->joints.size() == 4);
    for (const Vec2& j : inst.pose->joints) {
      CHECK(j.x >= 0.0);
      CHECK(j.x < 24.0);
      CHECK(j.y >= 0.0);
      CHECK(j.y < 20.0);
    }
    CHECK(inst.torso_box.has_value());
  }
}

TEST_CASE("noise-free rendering depends only on the pose") {
  SynthConfig config;
  config.num_positives = 2;
  config.num_negatives = 0;
  config.noise_level = 0.0;
  config.num_distractors = 0;
  config.angle_jitter_deg = 0.0;
  config.seed = 4;
  const auto [positives, negatives] = synth_stickfigures(config);
  REQUIRE(positives.size() == 2);
  // With jitter, noise, and distractors off, every instance picks one of
  // the planted modes exactly, so limb directions repeat across instances.
  const PartGraph graph = synth_graph(config.num_parts);
  for (const AnnotatedImage& inst : positives) {
    for (const auto& [a, b] : graph.edges()) {
      const double len =
          distance(inst.pose->joints[a], inst.pose->joints[b]);
      CHECK(len > 0.0);
    }
  }
}

TEST_CASE("the generator validates its configuration") {
  SynthConfig bad;
  bad.num_parts = 1;  // a chain needs at least one limb
  CHECK_THROWS_AS(synth_stickfigures(bad), ConfigError);
  SynthConfig tiny;
  tiny.width = 2;
  tiny.height = 2;  // no room for the default limb lengths
  CHECK_THROWS_AS(synth_stickfigures(tiny), ConfigError);
}

}  // TEST_SUITE
