#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "idpr/classifier.hpp"
#include "idpr/part_graph.hpp"
#include "idpr/ssvm.hpp"
#include "idpr/synth.hpp"
#include "idpr/weights.hpp"

namespace idpr {

// Everything a run needs, loadable from one JSON document. Every leaf can
// be overridden by an environment variable named IDPR_<PATH> with the
// dotted path uppercased and joined by underscores (arrays as JSON text).
struct PipelineConfig {
  std::string out_dir = "run";
  std::string train_annotations;  // defaults to the synth stage output
  std::string test_annotations;

  // graph: a chain over num_parts when edges is empty
  int num_parts = 4;
  std::vector<std::pair<int, int>> edges;
  int root = 0;
  std::vector<std::string> part_names;
  std::vector<std::pair<int, int>> left_right_pairs;
  bool midway_parts = false;

  int types_per_edge = 11;
  int stride = 1;
  ModelMode mode = ModelMode::kFull;

  double rotation_step_deg = 10.0;
  bool flip = true;

  // patch labeling
  int background_per_negative = 40;
  int background_per_positive = 10;
  double background_min_distance = 2.0;

  ClassifierConfig classifier;
  SsvmConfig ssvm;

  int mined_per_positive = 1;
  double mine_jitter_sigma = 0.0;
  int mining_rounds = 1;

  std::vector<double> pdj_thresholds = {0.05, 0.1, 0.15, 0.2, 0.25,
                                        0.3,  0.35, 0.4, 0.45, 0.5};
  int scale_part_a = 0;
  int scale_part_b = -1;  // -1 means the last part
  bool use_torso_mask = false;
  bool save_overlays = false;

  std::uint64_t seed = 0;

  SynthConfig synth;
  int synth_test_positives = 50;
};

// Defaults, overlaid with the JSON file (empty path skips the file), then
// with IDPR_* environment overrides. Unknown keys are rejected.
PipelineConfig load_pipeline_config(const std::string& path);

// Hash of the effective configuration; stamped into checkpoints so a
// changed config invalidates them.
std::string pipeline_config_hash(const PipelineConfig& config);

// The part tree the configuration describes, after optional midway-part
// expansion.
PartGraph config_base_graph(const PipelineConfig& config);
PartGraph config_graph(const PipelineConfig& config);

// Stages in execution order. Each is checkpointed under out_dir and
// skipped on rerun while its stamp matches the config hash and its
// artifacts exist; a stage that runs forces everything after it to run.
enum class Stage {
  kPrepare,     // augmentation + optional midway expansion
  kTypes,       // relation-type clustering
  kClassifier,  // patch extraction + classifier training
  kMaps,        // dense score maps for the training set
  kWeights,     // negative mining + structured training
  kEvaluate,    // inference on the test split + metric reports
};

struct PipelineResult {
  // mode name -> mean strict PCP in [0, 1], for modes that evaluated
  std::map<std::string, double> mean_strict_pcp;
};

// Generates the synthetic train/test datasets under out_dir/data.
void run_synth(const PipelineConfig& config);

// Runs stages up to and including `up_to` for each mode (empty -> just
// config.mode). Stages before kWeights are mode-independent and shared.
PipelineResult run_pipeline(const PipelineConfig& config,
                            std::vector<ModelMode> modes = {},
                            Stage up_to = Stage::kEvaluate);

}  // namespace idpr
