#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "idpr/error.hpp"
#include "idpr/image_io.hpp"
#include "idpr/pipeline.hpp"

using namespace idpr;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("idpr-pipe-test-" + std::to_string(std::rand()) + "-" +
            std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

// Appends a sentinel line; a stage that reruns rewrites its artifact from
// scratch, so marker survival proves the stage was skipped.
void append_marker(const fs::path& p, const std::string& line) {
  std::ofstream out(p, std::ios::app);
  out << line << '\n';
}

bool has_marker(const fs::path& p, const std::string& needle) {
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    if (line == needle) return true;
  }
  return false;
}

// setenv/unsetenv wrapper so overrides cannot leak into other tests.
struct EnvGuard {
  std::vector<std::string> names;
  void set(const std::string& name, const std::string& value) {
    ::setenv(name.c_str(), value.c_str(), 1);
    names.push_back(name);
  }
  ~EnvGuard() {
    for (const std::string& n : names) ::unsetenv(n.c_str());
  }
};

// Small enough to run the whole pipeline in well under a second.
PipelineConfig tiny_config(const fs::path& out_dir) {
  PipelineConfig c;
  c.out_dir = out_dir.string();
  c.num_parts = 3;
  c.types_per_edge = 2;
  c.stride = 1;
  c.mode = ModelMode::kFull;
  c.rotation_step_deg = 360.0;  // originals only
  c.flip = false;
  c.background_per_negative = 30;
  c.background_per_positive = 6;
  c.classifier.patch_side = 5;
  c.classifier.hidden_units = 6;
  c.classifier.epochs = 12;
  c.classifier.batch_size = 16;
  c.classifier.validation_fraction = 0.0;
  c.ssvm.C = 1.0;
  c.ssvm.epochs = 40;
  c.ssvm.eta0 = 0.1;
  c.ssvm.lambda = 1e-4;
  c.synth.num_positives = 6;
  c.synth.num_negatives = 2;
  c.synth_test_positives = 3;
  c.synth.width = 26;
  c.synth.height = 26;
  c.synth.num_parts = 3;
  c.synth.angle_jitter_deg = 7.0;
  c.synth.num_distractors = 1;
  c.seed = 5;
  c.synth.seed = 5;
  return c;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("an empty config path yields the documented defaults") {
  const PipelineConfig c = load_pipeline_config("");
  CHECK(c.out_dir == "run");
  CHECK(c.num_parts == 4);
  CHECK(c.root == 0);
  CHECK(c.edges.empty());
  CHECK(c.types_per_edge == 11);
  CHECK(c.stride == 1);
  CHECK(c.mode == ModelMode::kFull);
  CHECK(c.rotation_step_deg == 10.0);
  CHECK(c.flip);
  CHECK(c.background_per_negative == 40);
  CHECK(c.classifier.patch_side == 36);
  CHECK(c.mined_per_positive == 1);
  CHECK(c.mining_rounds == 1);
  CHECK(c.pdj_thresholds.size() == 10);
  CHECK(c.scale_part_b == -1);
  CHECK(c.synth_test_positives == 50);
  CHECK(c.seed == 0);
}

TEST_CASE("file values overlay defaults and unknown keys are rejected") {
  TempDir dir;
  const fs::path good = dir.path / "good.json";
  write_text(good, R"({
    "stride": 2,
    "mode": "no-idprs",
    "graph": {"num_parts": 6, "midway_parts": true},
    "synth": {"test_positives": 7}
  })");
  const PipelineConfig c = load_pipeline_config(good.string());
  CHECK(c.stride == 2);
  CHECK(c.mode == ModelMode::kNoIdprs);
  CHECK(c.num_parts == 6);
  CHECK(c.midway_parts);
  CHECK(c.synth_test_positives == 7);
  CHECK(c.types_per_edge == 11);  // untouched keys keep their defaults
  CHECK(c.flip);

  const fs::path unknown = dir.path / "unknown.json";
  write_text(unknown, R"({"bogus": 1})");
  try {
    load_pipeline_config(unknown.string());
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("bogus") != std::string::npos);
  }

  const fs::path nested = dir.path / "nested.json";
  write_text(nested, R"({"synth": {"num_positive": 1}})");
  try {
    load_pipeline_config(nested.string());
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("synth.num_positive") !=
          std::string::npos);
  }

  const fs::path shape = dir.path / "shape.json";
  write_text(shape, R"({"graph": 5})");
  try {
    load_pipeline_config(shape.string());
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("wrong shape") != std::string::npos);
  }

  write_text(dir.path / "broken.json", "not json {");
  CHECK_THROWS_AS(load_pipeline_config((dir.path / "broken.json").string()),
                  ConfigError);
  CHECK_THROWS_AS(load_pipeline_config((dir.path / "absent.json").string()),
                  ConfigError);
}

TEST_CASE("environment variables override file and default values") {
  TempDir dir;
  const fs::path file = dir.path / "cfg.json";
  write_text(file, R"({"stride": 2})");

  EnvGuard env;
  env.set("IDPR_STRIDE", "3");
  env.set("IDPR_MODE", "unary-only");  // bare strings need no quotes
  env.set("IDPR_SYNTH_TEST_POSITIVES", "9");
  env.set("IDPR_EVAL_PDJ_THRESHOLDS", "[0.1, 0.25, 0.5]");
  env.set("IDPR_OUT_DIR", "123");  // string-typed leaf keeps the raw text
  env.set("IDPR_AUGMENT_FLIP", "false");
  env.set("IDPR_BOGUS", "1");  // not a config leaf; ignored

  const PipelineConfig c = load_pipeline_config(file.string());
  CHECK(c.stride == 3);  // env beats the file
  CHECK(c.mode == ModelMode::kUnaryOnly);
  CHECK(c.synth_test_positives == 9);
  REQUIRE(c.pdj_thresholds.size() == 3);
  CHECK(c.pdj_thresholds[1] == 0.25);
  CHECK(c.out_dir == "123");
  CHECK(!c.flip);
}

TEST_CASE("config validation rejects out-of-range values") {
  TempDir dir;
  const auto reject = [&](const std::string& name, const std::string& body) {
    const fs::path p = dir.path / name;
    write_text(p, body);
    CHECK_THROWS_AS(load_pipeline_config(p.string()), ConfigError);
  };
  reject("stride.json", R"({"stride": 0})");
  reject("types.json", R"({"types_per_edge": 0})");
  reject("rounds.json", R"({"mining": {"rounds": 0}})");
  reject("outdir.json", R"({"out_dir": ""})");
}

TEST_CASE("the config hash tracks every field") {
  const PipelineConfig base;
  const std::string h = pipeline_config_hash(base);
  CHECK(h.size() == 16);
  CHECK(h.find_first_not_of("0123456789abcdef") == std::string::npos);
  CHECK(pipeline_config_hash(base) == h);

  PipelineConfig stride = base;
  stride.stride = 2;
  CHECK(pipeline_config_hash(stride) != h);

  PipelineConfig noise = base;
  noise.synth.noise_level += 0.01;
  CHECK(pipeline_config_hash(noise) != h);

  PipelineConfig seed = base;
  seed.seed = 1;
  CHECK(pipeline_config_hash(seed) != h);
}

TEST_CASE("the configured graph defaults to a chain and honors midway parts") {
  PipelineConfig c;
  c.num_parts = 3;
  const PartGraph base = config_base_graph(c);
  CHECK(base.num_parts() == 3);
  REQUIRE(base.num_edges() == 2);
  CHECK(base.edges()[0] == std::pair{0, 1});
  CHECK(base.edges()[1] == std::pair{1, 2});
  CHECK(base.root() == 0);
  CHECK(base.part_names()[2] == "part2");

  c.midway_parts = true;
  const PartGraph expanded = config_graph(c);
  CHECK(expanded.num_parts() == 5);
  CHECK(expanded.num_edges() == 4);
  CHECK(expanded.part_index("mid_part0_part1") >= 0);
  CHECK(config_base_graph(c).num_parts() == 3);

  PipelineConfig custom;
  custom.num_parts = 3;
  custom.edges = {{0, 2}, {2, 1}};
  custom.root = 2;
  custom.part_names = {"a", "b", "c"};
  const PartGraph g = config_base_graph(custom);
  CHECK(g.root() == 2);
  CHECK(g.edges()[0] == std::pair{0, 2});
  CHECK(g.part_names()[1] == "b");
}

TEST_CASE("stage failures name the stage that raised them") {
  TempDir dir;

  // A training set without a single annotated pose fails in 'prepare'.
  save_image(Image(8, 8, 0.5), (dir.path / "n0.png").string());
  write_text(dir.path / "neg.jsonl",
             R"({"id": "n0", "image_path": "n0.png", "joints": null})"
             "\n");
  PipelineConfig c = tiny_config(dir.path / "run");
  c.train_annotations = (dir.path / "neg.jsonl").string();
  try {
    run_pipeline(c);
    FAIL("expected a DataError");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("stage 'prepare' failed") != std::string::npos);
    CHECK(msg.find("positives") != std::string::npos);
  }

  // An invalid classifier setting passes config validation but fails once
  // its stage runs, keeping its error category.
  PipelineConfig bad = tiny_config(dir.path / "run2");
  bad.classifier.epochs = 0;
  run_synth(bad);
  try {
    run_pipeline(bad);
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("stage 'classifier' failed") !=
          std::string::npos);
  }
}

TEST_CASE("the pipeline runs end to end with checkpoint reuse") {
  TempDir dir;
  const fs::path out = dir.path / "run";
  PipelineConfig c = tiny_config(out);

  run_synth(c);
  CHECK(fs::exists(out / "data" / "train.jsonl"));
  CHECK(fs::exists(out / "data" / "test.jsonl"));
  CHECK(fs::exists(out / "data" / "train_images"));

  const PipelineResult first = run_pipeline(c);
  REQUIRE(first.mean_strict_pcp.count("full") == 1);
  const double pcp = first.mean_strict_pcp.at("full");
  CHECK(pcp >= 0.0);
  CHECK(pcp <= 1.0);
  for (const char* artifact :
       {"train_prepared.jsonl", "types.json", "classifier.json",
        "model-full.json", "predictions-full.jsonl", "report-full.json",
        "report-full.txt", "pdj-full.csv", "prepare.stamp",
        "evaluate-full.stamp"}) {
    CHECK_MESSAGE(fs::exists(out / artifact), artifact);
  }
  CHECK(fs::is_directory(out / "maps_train"));

  // A second mode reuses every mode-independent stage.
  const PipelineResult unary = run_pipeline(c, {ModelMode::kUnaryOnly});
  REQUIRE(unary.mean_strict_pcp.count("unary-only") == 1);
  CHECK(fs::exists(out / "model-unary-only.json"));
  CHECK(fs::exists(out / "report-unary-only.json"));

  // Unchanged config: everything is up to date, nothing is rewritten, and
  // the headline number is recovered from the stored report.
  const std::string marker = "### marker ###";
  append_marker(out / "train_prepared.jsonl", marker);
  append_marker(out / "predictions-full.jsonl", marker);
  const PipelineResult rerun = run_pipeline(c);
  CHECK(has_marker(out / "train_prepared.jsonl", marker));
  CHECK(has_marker(out / "predictions-full.jsonl", marker));
  REQUIRE(rerun.mean_strict_pcp.count("full") == 1);
  CHECK(rerun.mean_strict_pcp.at("full") ==
        doctest::Approx(pcp).epsilon(1e-12));

  // Deleting one artifact reruns only its stage and what follows.
  fs::remove(out / "report-full.json");
  run_pipeline(c);
  CHECK(fs::exists(out / "report-full.json"));
  CHECK(!has_marker(out / "predictions-full.jsonl", marker));  // rewritten
  CHECK(has_marker(out / "train_prepared.jsonl", marker));     // untouched

  // A config change invalidates every checkpoint.
  c.ssvm.C = 2.0;
  const PipelineResult cascaded = run_pipeline(c);
  CHECK(!has_marker(out / "train_prepared.jsonl", marker));
  CHECK(cascaded.mean_strict_pcp.count("full") == 1);
}

TEST_CASE("a partial run stops at the requested stage and resumes later") {
  TempDir dir;
  PipelineConfig data_cfg = tiny_config(dir.path / "data-run");
  run_synth(data_cfg);

  PipelineConfig c = tiny_config(dir.path / "run");
  c.train_annotations =
      (dir.path / "data-run" / "data" / "train.jsonl").string();
  c.test_annotations = (dir.path / "data-run" / "data" / "test.jsonl").string();

  run_pipeline(c, {}, Stage::kTypes);
  CHECK(fs::exists(dir.path / "run" / "types.json"));
  CHECK(!fs::exists(dir.path / "run" / "classifier.json"));

  const PipelineResult result = run_pipeline(c);
  CHECK(result.mean_strict_pcp.count("full") == 1);
  CHECK(fs::exists(dir.path / "run" / "model-full.json"));
}

}  // TEST_SUITE
