// Command-line front end: dataset synthesis, staged pipeline runs,
// standalone inference/evaluation, and the inference benchmark.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "bench.hpp"
#include "idpr/augment.hpp"
#include "idpr/dataset.hpp"
#include "idpr/error.hpp"
#include "idpr/eval.hpp"
#include "idpr/evidence.hpp"
#include "idpr/image_io.hpp"
#include "idpr/inference.hpp"
#include "idpr/model_io.hpp"
#include "idpr/parallel.hpp"
#include "idpr/pipeline.hpp"
#include "idpr/render.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace idpr;

namespace {

std::vector<LimbSpec> graph_limbs(const PartGraph& graph) {
  std::vector<LimbSpec> limbs;
  const auto& names = graph.part_names();
  for (const auto& [a, b] : graph.edges()) {
    LimbSpec limb;
    limb.p = a;
    limb.q = b;
    limb.name = names.empty() ? "limb" + std::to_string(limbs.size())
                              : names[a] + "-" + names[b];
    limbs.push_back(std::move(limb));
  }
  return limbs;
}

json pose_record(const std::string& id, const InferenceResult& result) {
  json record;
  record["id"] = id;
  json joints = json::array();
  for (const Vec2& j : result.pose.joints) {
    joints.push_back(json::array({j.x, j.y}));
  }
  record["joints"] = std::move(joints);
  record["types"] = result.types.types;
  record["score"] = result.score;
  return record;
}

struct InferOptions {
  std::string model_path;
  std::string image_path;
  std::string dataset_path;
  std::string out_path;
  std::string overlay_dir;
  std::vector<double> torso_box;
  bool use_torso_box = false;
};

int cmd_infer(const InferOptions& opt) {
  if (opt.image_path.empty() == opt.dataset_path.empty()) {
    throw ConfigError("pass exactly one of --image and --dataset");
  }
  const Model model = load_model(opt.model_path);
  const SpaceIndex space(model.graph, model.relations);

  std::ofstream out(opt.out_path);
  if (!out) throw DataError("cannot write " + opt.out_path);
  if (!opt.overlay_dir.empty()) fs::create_directories(opt.overlay_dir);

  auto run_one = [&](const std::string& id, const Image& image,
                     const std::optional<RootMask>& mask) {
    const ScoreMapStack maps = compute_score_maps(
        image, model.classifier, model.graph, space, model.stride);
    const InferenceResult result = infer(maps, model.weights, model.relations,
                                         model.graph, mask,
                                         model.weights.mode);
    out << pose_record(id, result).dump() << '\n';
    if (!opt.overlay_dir.empty()) {
      const RgbImage overlay =
          render_pose_overlay(image, result.pose, model.graph, &result.types);
      save_png(overlay, (fs::path(opt.overlay_dir) / (id + ".png")).string());
    }
  };

  if (!opt.image_path.empty()) {
    std::optional<RootMask> mask;
    if (!opt.torso_box.empty()) {
      const auto& b = opt.torso_box;
      mask = RootMask{b[0], b[1], b[2], b[3], -1};
    }
    run_one(fs::path(opt.image_path).stem().string(),
            load_image(opt.image_path), mask);
    return 0;
  }

  const std::vector<AnnotatedImage> set = load_dataset(opt.dataset_path);
  for (const AnnotatedImage& inst : set) {
    std::optional<RootMask> mask;
    if (opt.use_torso_box && inst.torso_box) {
      const auto& b = *inst.torso_box;
      mask = RootMask{b[0], b[1], b[2], b[3], -1};
    }
    run_one(inst.id, inst.image, mask);
  }
  return 0;
}

struct EvalOptions {
  std::string config_path;
  std::string predictions_path;
  std::string truth_path;
  bool strict = false;
  bool buffy = false;
  bool use_pdj = false;
  std::vector<double> pdj_thresholds;
  std::string report_json_path;
  std::string pdj_csv_path;
};

std::map<std::string, Pose> load_predictions(const std::string& path,
                                             int expected_joints) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::map<std::string, Pose> preds;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    json record;
    try {
      record = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError(where + ": " + e.what());
    }
    if (!record.contains("id") || !record.contains("joints")) {
      throw DataError(where + ": prediction needs `id` and `joints`");
    }
    Pose pose;
    for (const json& j : record.at("joints")) {
      if (!j.is_array() || j.size() != 2) {
        throw DataError(where + ": joints entries must be [x, y] pairs");
      }
      pose.joints.push_back({j[0].get<double>(), j[1].get<double>()});
    }
    if (pose.size() != expected_joints) {
      throw DataError(where + ": expected " +
                      std::to_string(expected_joints) + " joints, got " +
                      std::to_string(pose.size()));
    }
    const std::string id = record.at("id").get<std::string>();
    if (!preds.emplace(id, std::move(pose)).second) {
      throw DataError(where + ": duplicate prediction id '" + id + "'");
    }
  }
  return preds;
}

int cmd_eval(const EvalOptions& opt) {
  const PipelineConfig config = load_pipeline_config(opt.config_path);
  const PartGraph base_graph = config_base_graph(config);
  const PartGraph graph = config_graph(config);

  bool strict = opt.strict;
  bool buffy = opt.buffy;
  if (!strict && !buffy && !opt.use_pdj) {
    strict = buffy = true;
  }

  const std::map<std::string, Pose> preds =
      load_predictions(opt.predictions_path, graph.num_parts());
  const std::vector<AnnotatedImage> truth =
      load_dataset(opt.truth_path, base_graph.num_parts());

  std::vector<Pose> pred_poses;
  std::vector<Pose> gt_poses;
  std::size_t matched = 0;
  for (const AnnotatedImage& inst : truth) {
    if (!inst.pose) continue;
    const auto it = preds.find(inst.id);
    if (it == preds.end()) {
      throw DataError("no prediction for ground-truth id '" + inst.id + "'");
    }
    ++matched;
    pred_poses.push_back(it->second);
    gt_poses.push_back(config.midway_parts
                           ? add_midway_parts_pose(*inst.pose, base_graph)
                           : *inst.pose);
  }
  if (matched != preds.size()) {
    for (const auto& [id, pose] : preds) {
      bool found = false;
      for (const AnnotatedImage& inst : truth) {
        if (inst.pose && inst.id == id) found = true;
      }
      if (!found) {
        throw DataError("prediction id '" + id +
                        "' has no annotated ground truth");
      }
    }
  }
  if (pred_poses.empty()) throw DataError("nothing to evaluate");

  const std::vector<LimbSpec> limbs = graph_limbs(graph);
  std::vector<LimbCategory> categories;
  for (std::size_t l = 0; l < limbs.size(); ++l) {
    categories.push_back({limbs[l].name, {static_cast<int>(l)}});
  }

  json report;
  report["num_images"] = static_cast<int>(pred_poses.size());
  if (strict) {
    std::vector<PcpResult> results;
    for (std::size_t n = 0; n < pred_poses.size(); ++n) {
      results.push_back(strict_pcp(pred_poses[n], gt_poses[n], limbs));
    }
    const EvalReport r = aggregate_report(results, categories);
    std::cout << "strict PCP (" << pred_poses.size() << " images)\n"
              << report_to_text(r) << '\n';
    report["strict"] = json::parse(report_to_json(r));
  }
  if (buffy) {
    std::vector<PcpResult> results;
    for (std::size_t n = 0; n < pred_poses.size(); ++n) {
      results.push_back(buffy_pcp(pred_poses[n], gt_poses[n], limbs));
    }
    const EvalReport r = aggregate_report(results, categories);
    std::cout << "buffy PCP (" << pred_poses.size() << " images)\n"
              << report_to_text(r) << '\n';
    report["buffy"] = json::parse(report_to_json(r));
  }
  if (opt.use_pdj) {
    const std::vector<double>& thresholds =
        opt.pdj_thresholds.empty() ? config.pdj_thresholds
                                   : opt.pdj_thresholds;
    std::vector<int> joints;
    for (int i = 0; i < graph.num_parts(); ++i) joints.push_back(i);
    const int scale_b = config.scale_part_b >= 0
                            ? config.scale_part_b
                            : base_graph.num_parts() - 1;
    const PdjCurve curve = pdj(pred_poses, gt_poses, joints, thresholds,
                               {config.scale_part_a, scale_b});
    std::vector<std::string> joint_names;
    for (int i : joints) {
      joint_names.push_back(graph.part_names().empty()
                                ? "part" + std::to_string(i)
                                : graph.part_names()[i]);
    }
    const std::string csv = pdj_to_csv(curve, joint_names);
    if (opt.pdj_csv_path.empty()) {
      std::cout << "PDJ\n" << csv;
    } else {
      std::ofstream out(opt.pdj_csv_path);
      out << csv;
    }
  }
  if (!opt.report_json_path.empty()) {
    std::ofstream out(opt.report_json_path);
    out << report.dump(2) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Articulated pose estimation with mixture-typed spatial "
               "relations"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  int jobs = 0;
  app.add_option("--config", config_path,
                 "pipeline configuration JSON (defaults apply when omitted)");
  app.add_option("--jobs", jobs, "cap worker threads (0 = hardware default)");

  CLI::App* synth =
      app.add_subcommand("synth", "generate the synthetic dataset");
  CLI::App* types = app.add_subcommand(
      "cluster-types", "run the pipeline through relation-type clustering");
  CLI::App* evidence = app.add_subcommand(
      "train-evidence", "run the pipeline through patch-classifier training");
  CLI::App* maps = app.add_subcommand(
      "score-maps", "run the pipeline through training-set score maps");
  CLI::App* weights = app.add_subcommand(
      "train-weights", "run the pipeline through structured weight training");

  CLI::App* pipeline =
      app.add_subcommand("pipeline", "run every stage through evaluation");
  bool ablations = false;
  pipeline->add_flag("--ablations", ablations,
                     "also train and evaluate the no-idprs and unary-only "
                     "models");

  CLI::App* infer_cmd =
      app.add_subcommand("infer", "run a trained model on new images");
  InferOptions infer_opt;
  infer_cmd->add_option("--model", infer_opt.model_path, "model JSON")
      ->required();
  infer_cmd->add_option("--image", infer_opt.image_path,
                        "single PNG or PGM image");
  infer_cmd->add_option("--dataset", infer_opt.dataset_path,
                        "annotation JSONL naming the images");
  infer_cmd->add_option("--out", infer_opt.out_path, "output JSONL")
      ->required();
  infer_cmd->add_option("--overlay-dir", infer_opt.overlay_dir,
                        "write rendered pose overlays here");
  infer_cmd
      ->add_option("--torso-box", infer_opt.torso_box,
                   "x0 y0 x1 y1 window for the root part (single image)")
      ->expected(4);
  infer_cmd->add_flag("--use-torso-box", infer_opt.use_torso_box,
                      "mask the root with each record's torso box");

  CLI::App* eval_cmd = app.add_subcommand(
      "eval", "score a prediction file against annotated ground truth");
  EvalOptions eval_opt;
  eval_cmd
      ->add_option("--predictions", eval_opt.predictions_path,
                   "prediction JSONL from `infer`")
      ->required();
  eval_cmd
      ->add_option("--truth", eval_opt.truth_path,
                   "ground-truth annotation JSONL")
      ->required();
  eval_cmd->add_flag("--strict", eval_opt.strict,
                     "strict PCP (both endpoints within half limb length)");
  eval_cmd->add_flag("--buffy", eval_opt.buffy,
                     "buffy PCP (average endpoint error within threshold)");
  eval_cmd->add_flag("--pdj", eval_opt.use_pdj, "detection-rate curve");
  eval_cmd->add_option("--pdj-thresholds", eval_opt.pdj_thresholds,
                       "override the curve thresholds");
  eval_cmd->add_option("--report-json", eval_opt.report_json_path,
                       "write the PCP tables as JSON");
  eval_cmd->add_option("--pdj-csv", eval_opt.pdj_csv_path,
                       "write the curve as CSV instead of stdout");

  CLI::App* bench_cmd = app.add_subcommand(
      "bench", "time exact inference across problem sizes");
  std::string bench_json;
  int bench_repeats = 5;
  bool bench_quick = false;
  bench_cmd->add_option("--json", bench_json, "also dump timings as JSON");
  bench_cmd->add_option("--repeats", bench_repeats,
                        "runs per configuration (median reported)");
  bench_cmd->add_flag("--quick", bench_quick, "trim the sweep for smoke runs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);  // --help and friends
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (jobs < 0) throw ConfigError("--jobs must be >= 0");
    if (jobs > 0) set_max_jobs(jobs);

    if (*bench_cmd) {
      if (bench_repeats < 1) throw ConfigError("--repeats must be >= 1");
      bench::run(bench_json, bench_repeats, bench_quick);
      return 0;
    }
    if (*infer_cmd) return cmd_infer(infer_opt);
    if (*eval_cmd) {
      eval_opt.config_path = config_path;
      return cmd_eval(eval_opt);
    }

    const PipelineConfig config = load_pipeline_config(config_path);
    if (*synth) {
      run_synth(config);
      return 0;
    }

    // Stage commands share the checkpointed pipeline; generate the
    // synthetic data first when no dataset is configured yet.
    const fs::path default_train =
        fs::path(config.out_dir) / "data" / "train.jsonl";
    if (config.train_annotations.empty() && !fs::exists(default_train)) {
      run_synth(config);
    }

    Stage up_to = Stage::kEvaluate;
    if (*types) up_to = Stage::kTypes;
    if (*evidence) up_to = Stage::kClassifier;
    if (*maps) up_to = Stage::kMaps;
    if (*weights) up_to = Stage::kWeights;

    std::vector<ModelMode> modes;
    if (*pipeline && ablations) {
      modes = {ModelMode::kFull, ModelMode::kNoIdprs, ModelMode::kUnaryOnly};
    }
    run_pipeline(config, modes, up_to);
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
}
