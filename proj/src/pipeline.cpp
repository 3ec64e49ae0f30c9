#include "idpr/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <nlohmann/json.hpp>

#include "idpr/augment.hpp"
#include "idpr/dataset.hpp"
#include "idpr/error.hpp"
#include "idpr/eval.hpp"
#include "idpr/evidence.hpp"
#include "idpr/inference.hpp"
#include "idpr/model_io.hpp"
#include "idpr/render.hpp"
#include "idpr/rng.hpp"
#include "idpr/score.hpp"
#include "idpr/score_maps.hpp"
#include "idpr/typelearn.hpp"

namespace idpr {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path train_annotations_path(const PipelineConfig& c) {
  return c.train_annotations.empty()
             ? fs::path(c.out_dir) / "data" / "train.jsonl"
             : fs::path(c.train_annotations);
}

fs::path test_annotations_path(const PipelineConfig& c) {
  return c.test_annotations.empty()
             ? fs::path(c.out_dir) / "data" / "test.jsonl"
             : fs::path(c.test_annotations);
}

// Stage checkpointing: a stage is skipped when its stamp holds the current
// config hash and all its artifacts exist; once any stage runs, everything
// after it runs too.
struct Checkpoints {
  fs::path dir;
  std::string hash;
  bool dirty = false;

  fs::path stamp(const std::string& stage) const {
    return dir / (stage + ".stamp");
  }

  bool done(const std::string& stage,
            const std::vector<fs::path>& artifacts) const {
    if (dirty) return false;
    std::ifstream in(stamp(stage));
    std::string stored;
    if (!in || !std::getline(in, stored) || stored != hash) return false;
    for (const fs::path& artifact : artifacts) {
      if (!fs::exists(artifact)) return false;
    }
    return true;
  }

  template <typename Fn>
  void stage(const std::string& name, const std::vector<fs::path>& artifacts,
             Fn run) {
    if (done(name, artifacts)) {
      std::cerr << "[pipeline] " << name << ": up to date\n";
      return;
    }
    std::cerr << "[pipeline] " << name << ": running\n";
    fs::remove(stamp(name));
    try {
      run();
    } catch (const ConfigError& e) {
      throw ConfigError("stage '" + name + "' failed: " + e.what());
    } catch (const DataError& e) {
      throw DataError("stage '" + name + "' failed: " + e.what());
    } catch (const std::exception& e) {
      throw Error("stage '" + name + "' failed: " + e.what());
    }
    std::ofstream out(stamp(name));
    out << hash << '\n';
    dirty = true;
  }
};

std::vector<const AnnotatedImage*> positives_of(
    const std::vector<AnnotatedImage>& set) {
  std::vector<const AnnotatedImage*> out;
  for (const AnnotatedImage& inst : set) {
    if (inst.pose) out.push_back(&inst);
  }
  return out;
}

std::vector<const AnnotatedImage*> negatives_of(
    const std::vector<AnnotatedImage>& set) {
  std::vector<const AnnotatedImage*> out;
  for (const AnnotatedImage& inst : set) {
    if (!inst.pose) out.push_back(&inst);
  }
  return out;
}

void write_types_file(const fs::path& path, const RelationModel& relations,
                      const std::vector<std::string>& ids,
                      const std::vector<TypeAssignment>& assignments) {
  json j;
  json offsets = json::array();
  for (int d = 0; d < relations.num_directed_edges(); ++d) {
    json per_dir = json::array();
    for (const Vec2& c : relations.mean_offsets(d)) {
      per_dir.push_back(json::array({c.x, c.y}));
    }
    offsets.push_back(std::move(per_dir));
  }
  j["offsets"] = std::move(offsets);
  json assigned = json::array();
  for (std::size_t n = 0; n < ids.size(); ++n) {
    assigned.push_back({{"id", ids[n]}, {"types", assignments[n].types}});
  }
  j["assignments"] = std::move(assigned);
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  if (!out) throw DataError("failed writing " + path.string());
}

void read_types_file(const fs::path& path, const PartGraph& graph,
                     RelationModel* relations,
                     std::map<std::string, TypeAssignment>* assignments) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open types file " + path.string());
  json j;
  in >> j;
  std::vector<std::vector<Vec2>> offsets;
  for (const json& per_dir : j.at("offsets")) {
    std::vector<Vec2> centers;
    for (const json& c : per_dir) {
      centers.emplace_back(c[0].get<double>(), c[1].get<double>());
    }
    offsets.push_back(std::move(centers));
  }
  *relations = RelationModel(graph, std::move(offsets));
  assignments->clear();
  for (const json& entry : j.at("assignments")) {
    TypeAssignment t;
    t.types = entry.at("types").get<std::vector<int>>();
    (*assignments)[entry.at("id").get<std::string>()] = std::move(t);
  }
}

void stage_prepare(const PipelineConfig& c, const PartGraph& base_graph,
                   const fs::path& prepared_jsonl,
                   const fs::path& prepared_images) {
  std::vector<AnnotatedImage> raw =
      load_dataset(train_annotations_path(c).string(),
                   base_graph.num_parts());
  std::vector<AnnotatedImage> positives;
  std::vector<AnnotatedImage> negatives;
  for (AnnotatedImage& inst : raw) {
    (inst.pose ? positives : negatives).push_back(std::move(inst));
  }
  if (positives.empty()) {
    throw DataError("training set has no annotated positives");
  }

  AugmentStats stats;
  std::vector<AnnotatedImage> prepared =
      augment(positives, c.rotation_step_deg, c.flip, base_graph, &stats);
  std::cerr << "[pipeline] augmented " << positives.size() << " -> "
            << stats.produced << " positives (" << stats.dropped
            << " dropped)\n";
  if (c.midway_parts) {
    for (AnnotatedImage& inst : prepared) {
      inst.pose = add_midway_parts_pose(*inst.pose, base_graph);
    }
  }
  for (AnnotatedImage& neg : negatives) prepared.push_back(std::move(neg));
  save_dataset(prepared, prepared_jsonl.string(), prepared_images.string());
}

void stage_types(const PipelineConfig& c, const PartGraph& graph,
                 const fs::path& prepared_jsonl, const fs::path& types_json) {
  std::vector<AnnotatedImage> prepared =
      load_dataset(prepared_jsonl.string(), graph.num_parts());
  std::vector<Pose> poses;
  std::vector<std::string> ids;
  for (const AnnotatedImage* inst : positives_of(prepared)) {
    poses.push_back(*inst->pose);
    ids.push_back(inst->id);
  }
  auto [relations, assignments] =
      derive_types(poses, graph, c.types_per_edge, derive_seed(c.seed, "types"));
  write_types_file(types_json, relations, ids, assignments);
}

void stage_classifier(const PipelineConfig& c, const PartGraph& graph,
                      const fs::path& prepared_jsonl,
                      const fs::path& types_json,
                      const fs::path& classifier_json) {
  std::vector<AnnotatedImage> prepared =
      load_dataset(prepared_jsonl.string(), graph.num_parts());
  RelationModel relations;
  std::map<std::string, TypeAssignment> assignments;
  read_types_file(types_json, graph, &relations, &assignments);
  const SpaceIndex space(graph, relations);

  std::vector<std::pair<Image, PatchLabel>> examples;
  const int side = c.classifier.patch_side;
  for (const AnnotatedImage* inst : positives_of(prepared)) {
    const auto it = assignments.find(inst->id);
    if (it == assignments.end()) {
      throw DataError("no type assignment for instance '" + inst->id + "'");
    }
    const Pose& pose = *inst->pose;
    for (int i = 0; i < graph.num_parts(); ++i) {
      const auto [cx, cy] = snap_to_grid(pose.joints[i], inst->image.width(),
                                         inst->image.height());
      PatchLabel label;
      label.category = i + 1;
      for (int j : graph.neighbors(i)) {
        label.relation_types.push_back(
            it->second.types.at(graph.directed_id(i, j)));
      }
      examples.emplace_back(extract_patch(inst->image, cx, cy, side),
                            std::move(label));
    }
    // Off-figure cells of positives make harder background examples than
    // pure noise renders.
    Rng rng(derive_seed(c.seed, "bgpos:" + inst->id));
    int sampled = 0;
    for (int attempt = 0;
         attempt < 20 * c.background_per_positive &&
         sampled < c.background_per_positive;
         ++attempt) {
      const int x = static_cast<int>(rng.next_below(inst->image.width()));
      const int y = static_cast<int>(rng.next_below(inst->image.height()));
      bool clear = true;
      for (const Vec2& j : pose.joints) {
        if ((j - Vec2(x, y)).norm() <= c.background_min_distance) {
          clear = false;
          break;
        }
      }
      if (!clear) continue;
      examples.emplace_back(extract_patch(inst->image, x, y, side),
                            PatchLabel{});
      ++sampled;
    }
  }
  for (const AnnotatedImage* inst : negatives_of(prepared)) {
    Rng rng(derive_seed(c.seed, "bgneg:" + inst->id));
    for (int s = 0; s < c.background_per_negative; ++s) {
      const int x = static_cast<int>(rng.next_below(inst->image.width()));
      const int y = static_cast<int>(rng.next_below(inst->image.height()));
      examples.emplace_back(extract_patch(inst->image, x, y, side),
                            PatchLabel{});
    }
  }

  const PatchClassifier classifier = train_patch_classifier(
      examples, space, c.classifier, derive_seed(c.seed, "classifier"));
  save_classifier(classifier, classifier_json.string());
}

void stage_maps(const PipelineConfig& c, const PartGraph& graph,
                const fs::path& prepared_jsonl, const fs::path& types_json,
                const fs::path& classifier_json, const fs::path& maps_dir) {
  std::vector<AnnotatedImage> prepared =
      load_dataset(prepared_jsonl.string(), graph.num_parts());
  RelationModel relations;
  std::map<std::string, TypeAssignment> assignments;
  read_types_file(types_json, graph, &relations, &assignments);
  const SpaceIndex space(graph, relations);
  const PatchClassifier classifier = load_classifier(classifier_json.string());

  fs::create_directories(maps_dir);
  for (const AnnotatedImage& inst : prepared) {
    const ScoreMapStack maps =
        compute_score_maps(inst.image, classifier, graph, space, c.stride);
    save_score_maps(maps, maps_dir / (inst.id + ".maps"));
  }
}

Weights stage_weights(const PipelineConfig& c, const PartGraph& graph,
                      ModelMode mode, const fs::path& prepared_jsonl,
                      const fs::path& types_json,
                      const fs::path& classifier_json,
                      const fs::path& maps_dir, const fs::path& model_json) {
  std::vector<AnnotatedImage> prepared =
      load_dataset(prepared_jsonl.string(), graph.num_parts());
  RelationModel relations;
  std::map<std::string, TypeAssignment> assignments;
  read_types_file(types_json, graph, &relations, &assignments);

  // Keep every training map in memory: positives feed both the positive
  // features and the displaced-pose negatives, negatives feed mining.
  std::vector<ScoreMapStack> storage;
  storage.reserve(prepared.size());
  std::vector<LabeledInstance> positives;
  std::vector<const ScoreMapStack*> negative_maps;
  for (const AnnotatedImage& inst : prepared) {
    storage.push_back(load_score_maps(maps_dir / (inst.id + ".maps")));
  }
  for (std::size_t n = 0; n < prepared.size(); ++n) {
    const AnnotatedImage& inst = prepared[n];
    if (inst.pose) {
      const auto it = assignments.find(inst.id);
      if (it == assignments.end()) {
        throw DataError("no type assignment for instance '" + inst.id + "'");
      }
      positives.push_back(LabeledInstance{&storage[n], *inst.pose, it->second});
    } else {
      negative_maps.push_back(&storage[n]);
    }
  }

  std::vector<TrainingExample> examples;
  for (const LabeledInstance& pos : positives) {
    examples.push_back(TrainingExample{
        build_feature_vector(*pos.maps, pos.pose, pos.types, graph, relations,
                             mode),
        1});
  }

  SsvmConfig ssvm = c.ssvm;
  ssvm.seed = derive_seed(c.seed, std::string("ssvm:") + to_string(mode));
  Weights snapshot = default_weights(mode, graph, relations);
  Weights trained = snapshot;
  for (int round = 0; round < c.mining_rounds; ++round) {
    const std::vector<TrainingExample> mined = mine_negative_examples(
        positives, negative_maps, snapshot, graph, relations,
        c.mined_per_positive, c.mine_jitter_sigma,
        derive_seed(c.seed, std::string("mine:") + to_string(mode) + ":" +
                                std::to_string(round)));
    examples.insert(examples.end(), mined.begin(), mined.end());
    trained = train_weights(examples, graph, relations, mode, ssvm);
    snapshot = trained;
  }

  Model model;
  model.graph = graph;
  model.relations = relations;
  model.weights = trained;
  model.classifier = load_classifier(classifier_json.string());
  model.stride = c.stride;
  save_model(model, model_json.string());
  return trained;
}

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

double stage_evaluate(const PipelineConfig& c, const PartGraph& base_graph,
                      const fs::path& model_json,
                      const fs::path& predictions_jsonl,
                      const fs::path& report_json, const fs::path& report_txt,
                      const fs::path& pdj_csv, const fs::path& overlay_dir) {
  const Model model = load_model(model_json.string());
  const SpaceIndex space(model.graph, model.relations);
  std::vector<AnnotatedImage> test = load_dataset(
      test_annotations_path(c).string(), base_graph.num_parts());

  std::ofstream pred_out(predictions_jsonl);
  if (!pred_out) {
    throw DataError("cannot write " + predictions_jsonl.string());
  }

  std::vector<Pose> pred_poses;
  std::vector<Pose> gt_poses;
  std::vector<PcpResult> strict_results;
  std::vector<PcpResult> buffy_results;
  const std::vector<LimbSpec> limbs = graph_limbs(model.graph);

  if (c.save_overlays) fs::create_directories(overlay_dir);

  for (const AnnotatedImage& inst : test) {
    if (!inst.pose) continue;
    const ScoreMapStack maps = compute_score_maps(
        inst.image, model.classifier, model.graph, space, model.stride);
    std::optional<RootMask> mask;
    if (c.use_torso_mask && inst.torso_box) {
      const auto& b = *inst.torso_box;
      mask = RootMask{b[0], b[1], b[2], b[3], -1};
    }
    const InferenceResult result = infer(maps, model.weights, model.relations,
                                         model.graph, mask,
                                         model.weights.mode);

    json record;
    record["id"] = inst.id;
    json joints = json::array();
    for (const Vec2& j : result.pose.joints) {
      joints.push_back(json::array({j.x, j.y}));
    }
    record["joints"] = std::move(joints);
    record["types"] = result.types.types;
    record["score"] = result.score;
    pred_out << record.dump() << '\n';

    const Pose gt = c.midway_parts
                        ? add_midway_parts_pose(*inst.pose, base_graph)
                        : *inst.pose;
    strict_results.push_back(strict_pcp(result.pose, gt, limbs));
    buffy_results.push_back(buffy_pcp(result.pose, gt, limbs));
    pred_poses.push_back(result.pose);
    gt_poses.push_back(gt);

    if (c.save_overlays) {
      const RgbImage overlay = render_pose_overlay(inst.image, result.pose,
                                                   model.graph, &result.types);
      save_png(overlay, (overlay_dir / (inst.id + ".png")).string());
    }
  }
  if (strict_results.empty()) {
    throw DataError("test set has no annotated instances");
  }

  std::vector<LimbCategory> categories;
  for (std::size_t l = 0; l < limbs.size(); ++l) {
    categories.push_back({limbs[l].name, {static_cast<int>(l)}});
  }
  const EvalReport strict_report = aggregate_report(strict_results, categories);
  const EvalReport buffy_report = aggregate_report(buffy_results, categories);

  std::vector<int> pdj_joints;
  for (int i = 0; i < model.graph.num_parts(); ++i) pdj_joints.push_back(i);
  const int scale_b =
      c.scale_part_b >= 0 ? c.scale_part_b : base_graph.num_parts() - 1;
  const PdjCurve curve = pdj(pred_poses, gt_poses, pdj_joints,
                             c.pdj_thresholds, {c.scale_part_a, scale_b});

  json j;
  j["mode"] = to_string(model.weights.mode);
  j["num_test"] = static_cast<int>(strict_results.size());
  j["strict"] = json::parse(report_to_json(strict_report));
  j["buffy"] = json::parse(report_to_json(buffy_report));
  std::ofstream rj(report_json);
  rj << j.dump(2) << '\n';

  std::ofstream rt(report_txt);
  rt << "strict PCP (" << to_string(model.weights.mode) << ", "
     << strict_results.size() << " images)\n"
     << report_to_text(strict_report) << "\nbuffy PCP\n"
     << report_to_text(buffy_report);

  std::vector<std::string> joint_names;
  for (int i : pdj_joints) {
    joint_names.push_back(model.graph.part_names().empty()
                              ? "part" + std::to_string(i)
                              : model.graph.part_names()[i]);
  }
  std::ofstream pc(pdj_csv);
  pc << pdj_to_csv(curve, joint_names);

  std::cerr << "[pipeline] " << to_string(model.weights.mode)
            << " mean strict PCP "
            << 100.0 * strict_report.mean_rate << "\n";
  return strict_report.mean_rate;
}

}  // namespace

void run_synth(const PipelineConfig& config) {
  const fs::path data_dir = fs::path(config.out_dir) / "data";
  fs::create_directories(data_dir);

  auto [pos, neg] = synth_stickfigures(config.synth);
  std::vector<AnnotatedImage> train = std::move(pos);
  for (AnnotatedImage& n : neg) train.push_back(std::move(n));
  save_dataset(train, (data_dir / "train.jsonl").string(),
               (data_dir / "train_images").string());

  SynthConfig test_cfg = config.synth;
  test_cfg.num_positives = config.synth_test_positives;
  test_cfg.num_negatives = 0;
  test_cfg.seed = derive_seed(config.seed, "test-split");
  auto [test_pos, test_neg] = synth_stickfigures(test_cfg);
  (void)test_neg;
  save_dataset(test_pos, (data_dir / "test.jsonl").string(),
               (data_dir / "test_images").string());
  std::cerr << "[synth] wrote " << train.size() << " train and "
            << test_pos.size() << " test instances under "
            << data_dir.string() << "\n";
}

PipelineResult run_pipeline(const PipelineConfig& config,
                            std::vector<ModelMode> modes, Stage up_to) {
  if (modes.empty()) modes = {config.mode};
  const PartGraph base_graph = config_base_graph(config);
  const PartGraph graph = config_graph(config);

  const fs::path out(config.out_dir);
  fs::create_directories(out);
  Checkpoints cp{out, pipeline_config_hash(config)};

  const fs::path prepared_jsonl = out / "train_prepared.jsonl";
  const fs::path prepared_images = out / "train_prepared_images";
  const fs::path types_json = out / "types.json";
  const fs::path classifier_json = out / "classifier.json";
  const fs::path maps_dir = out / "maps_train";

  PipelineResult result;

  cp.stage("prepare", {prepared_jsonl}, [&] {
    stage_prepare(config, base_graph, prepared_jsonl, prepared_images);
  });
  if (up_to == Stage::kPrepare) return result;

  cp.stage("types", {types_json}, [&] {
    stage_types(config, graph, prepared_jsonl, types_json);
  });
  if (up_to == Stage::kTypes) return result;

  cp.stage("classifier", {classifier_json}, [&] {
    stage_classifier(config, graph, prepared_jsonl, types_json,
                     classifier_json);
  });
  if (up_to == Stage::kClassifier) return result;

  cp.stage("maps", {maps_dir}, [&] {
    stage_maps(config, graph, prepared_jsonl, types_json, classifier_json,
               maps_dir);
  });
  if (up_to == Stage::kMaps) return result;

  for (ModelMode mode : modes) {
    const std::string tag = to_string(mode);
    const fs::path model_json = out / ("model-" + tag + ".json");
    cp.stage("weights-" + tag, {model_json}, [&] {
      stage_weights(config, graph, mode, prepared_jsonl, types_json,
                    classifier_json, maps_dir, model_json);
    });
  }
  if (up_to == Stage::kWeights) return result;

  for (ModelMode mode : modes) {
    const std::string tag = to_string(mode);
    const fs::path model_json = out / ("model-" + tag + ".json");
    const fs::path predictions = out / ("predictions-" + tag + ".jsonl");
    const fs::path report_json = out / ("report-" + tag + ".json");
    const fs::path report_txt = out / ("report-" + tag + ".txt");
    const fs::path pdj_csv = out / ("pdj-" + tag + ".csv");
    const fs::path overlays = out / ("overlays-" + tag);
    cp.stage("evaluate-" + tag,
             {predictions, report_json, report_txt, pdj_csv}, [&] {
               result.mean_strict_pcp[tag] = stage_evaluate(
                   config, base_graph, model_json, predictions, report_json,
                   report_txt, pdj_csv, overlays);
             });
    if (result.mean_strict_pcp.find(tag) == result.mean_strict_pcp.end()) {
      // Stage was up to date; recover the headline number from the report.
      std::ifstream in(report_json);
      json j;
      in >> j;
      result.mean_strict_pcp[tag] =
          j.at("strict").at("mean_pcp").get<double>() / 100.0;
    }
  }
  return result;
}

}  // namespace idpr
