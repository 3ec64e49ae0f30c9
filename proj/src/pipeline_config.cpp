#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include <nlohmann/json.hpp>

#include "idpr/augment.hpp"
#include "idpr/error.hpp"
#include "idpr/pipeline.hpp"
#include "idpr/rng.hpp"

namespace idpr {
namespace {

using nlohmann::json;

json pairs_to_json(const std::vector<std::pair<int, int>>& pairs) {
  json out = json::array();
  for (const auto& [a, b] : pairs) out.push_back(json::array({a, b}));
  return out;
}

std::vector<std::pair<int, int>> pairs_from_json(const json& j,
                                                 const std::string& key) {
  std::vector<std::pair<int, int>> out;
  for (const json& e : j) {
    if (!e.is_array() || e.size() != 2) {
      throw ConfigError("config key '" + key + "' needs [a, b] pairs");
    }
    out.emplace_back(e[0].get<int>(), e[1].get<int>());
  }
  return out;
}

const char* feature_kind_name(PatchFeatureConfig::Kind kind) {
  return kind == PatchFeatureConfig::Kind::kRawPixels ? "raw-pixels"
                                                      : "gradient-histogram";
}

json config_to_json(const PipelineConfig& c) {
  json j;
  j["out_dir"] = c.out_dir;
  j["train_annotations"] = c.train_annotations;
  j["test_annotations"] = c.test_annotations;
  j["graph"] = {{"num_parts", c.num_parts},
                {"edges", pairs_to_json(c.edges)},
                {"root", c.root},
                {"part_names", c.part_names},
                {"left_right_pairs", pairs_to_json(c.left_right_pairs)},
                {"midway_parts", c.midway_parts}};
  j["types_per_edge"] = c.types_per_edge;
  j["stride"] = c.stride;
  j["mode"] = to_string(c.mode);
  j["augment"] = {{"rotation_step_deg", c.rotation_step_deg},
                  {"flip", c.flip}};
  j["patches"] = {{"background_per_negative", c.background_per_negative},
                  {"background_per_positive", c.background_per_positive},
                  {"background_min_distance", c.background_min_distance}};
  j["classifier"] = {
      {"patch_side", c.classifier.patch_side},
      {"feature_kind", feature_kind_name(c.classifier.features.kind)},
      {"hist_cells", c.classifier.features.hist_cells},
      {"hist_bins", c.classifier.features.hist_bins},
      {"hidden_units", c.classifier.hidden_units},
      {"epochs", c.classifier.epochs},
      {"learning_rate", c.classifier.learning_rate},
      {"lr_decay", c.classifier.lr_decay},
      {"batch_size", c.classifier.batch_size},
      {"validation_fraction", c.classifier.validation_fraction}};
  j["ssvm"] = {{"C", c.ssvm.C},
               {"epochs", c.ssvm.epochs},
               {"eta0", c.ssvm.eta0},
               {"lambda", c.ssvm.lambda}};
  j["mining"] = {{"per_positive", c.mined_per_positive},
                 {"jitter_sigma", c.mine_jitter_sigma},
                 {"rounds", c.mining_rounds}};
  j["eval"] = {{"pdj_thresholds", c.pdj_thresholds},
               {"scale_part_a", c.scale_part_a},
               {"scale_part_b", c.scale_part_b},
               {"use_torso_mask", c.use_torso_mask},
               {"save_overlays", c.save_overlays}};
  j["seed"] = c.seed;
  j["synth"] = {{"num_positives", c.synth.num_positives},
                {"num_negatives", c.synth.num_negatives},
                {"test_positives", c.synth_test_positives},
                {"width", c.synth.width},
                {"height", c.synth.height},
                {"num_parts", c.synth.num_parts},
                {"limb_lengths", c.synth.limb_lengths},
                {"angle_modes_deg", c.synth.angle_modes_deg},
                {"angle_jitter_deg", c.synth.angle_jitter_deg},
                {"limb_width", c.synth.limb_width},
                {"limb_texture", c.synth.limb_texture},
                {"joint_disc_radius", c.synth.joint_disc_radius},
                {"noise_level", c.synth.noise_level},
                {"num_distractors", c.synth.num_distractors}};
  return j;
}

PipelineConfig config_from_json(const json& j) {
  PipelineConfig c;
  c.out_dir = j.at("out_dir").get<std::string>();
  c.train_annotations = j.at("train_annotations").get<std::string>();
  c.test_annotations = j.at("test_annotations").get<std::string>();

  const json& g = j.at("graph");
  c.num_parts = g.at("num_parts").get<int>();
  c.edges = pairs_from_json(g.at("edges"), "graph.edges");
  c.root = g.at("root").get<int>();
  c.part_names = g.at("part_names").get<std::vector<std::string>>();
  c.left_right_pairs =
      pairs_from_json(g.at("left_right_pairs"), "graph.left_right_pairs");
  c.midway_parts = g.at("midway_parts").get<bool>();

  c.types_per_edge = j.at("types_per_edge").get<int>();
  c.stride = j.at("stride").get<int>();
  c.mode = parse_mode(j.at("mode").get<std::string>());

  const json& a = j.at("augment");
  c.rotation_step_deg = a.at("rotation_step_deg").get<double>();
  c.flip = a.at("flip").get<bool>();

  const json& p = j.at("patches");
  c.background_per_negative = p.at("background_per_negative").get<int>();
  c.background_per_positive = p.at("background_per_positive").get<int>();
  c.background_min_distance = p.at("background_min_distance").get<double>();

  const json& cl = j.at("classifier");
  c.classifier.patch_side = cl.at("patch_side").get<int>();
  const std::string kind = cl.at("feature_kind").get<std::string>();
  if (kind == "raw-pixels") {
    c.classifier.features.kind = PatchFeatureConfig::Kind::kRawPixels;
  } else if (kind == "gradient-histogram") {
    c.classifier.features.kind = PatchFeatureConfig::Kind::kGradientHistogram;
  } else {
    throw ConfigError("unknown classifier.feature_kind '" + kind + "'");
  }
  c.classifier.features.hist_cells = cl.at("hist_cells").get<int>();
  c.classifier.features.hist_bins = cl.at("hist_bins").get<int>();
  c.classifier.hidden_units = cl.at("hidden_units").get<int>();
  c.classifier.epochs = cl.at("epochs").get<int>();
  c.classifier.learning_rate = cl.at("learning_rate").get<double>();
  c.classifier.lr_decay = cl.at("lr_decay").get<double>();
  c.classifier.batch_size = cl.at("batch_size").get<int>();
  c.classifier.validation_fraction =
      cl.at("validation_fraction").get<double>();

  const json& s = j.at("ssvm");
  c.ssvm.C = s.at("C").get<double>();
  c.ssvm.epochs = s.at("epochs").get<int>();
  c.ssvm.eta0 = s.at("eta0").get<double>();
  c.ssvm.lambda = s.at("lambda").get<double>();

  const json& m = j.at("mining");
  c.mined_per_positive = m.at("per_positive").get<int>();
  c.mine_jitter_sigma = m.at("jitter_sigma").get<double>();
  c.mining_rounds = m.at("rounds").get<int>();

  const json& e = j.at("eval");
  c.pdj_thresholds = e.at("pdj_thresholds").get<std::vector<double>>();
  c.scale_part_a = e.at("scale_part_a").get<int>();
  c.scale_part_b = e.at("scale_part_b").get<int>();
  c.use_torso_mask = e.at("use_torso_mask").get<bool>();
  c.save_overlays = e.at("save_overlays").get<bool>();

  c.seed = j.at("seed").get<std::uint64_t>();

  const json& sy = j.at("synth");
  c.synth.num_positives = sy.at("num_positives").get<int>();
  c.synth.num_negatives = sy.at("num_negatives").get<int>();
  c.synth_test_positives = sy.at("test_positives").get<int>();
  c.synth.width = sy.at("width").get<int>();
  c.synth.height = sy.at("height").get<int>();
  c.synth.num_parts = sy.at("num_parts").get<int>();
  c.synth.limb_lengths = sy.at("limb_lengths").get<std::vector<double>>();
  c.synth.angle_modes_deg =
      sy.at("angle_modes_deg").get<std::vector<std::vector<double>>>();
  c.synth.angle_jitter_deg = sy.at("angle_jitter_deg").get<double>();
  c.synth.limb_width = sy.at("limb_width").get<double>();
  c.synth.limb_texture = sy.at("limb_texture").get<double>();
  c.synth.joint_disc_radius = sy.at("joint_disc_radius").get<double>();
  c.synth.noise_level = sy.at("noise_level").get<double>();
  c.synth.num_distractors = sy.at("num_distractors").get<int>();
  c.synth.seed = c.seed;
  return c;
}

// Overlays `patch` onto `base`, recursing into objects; any key absent
// from the defaults is unknown and rejected.
void merge_config(json& base, const json& patch, const std::string& prefix) {
  for (const auto& [key, value] : patch.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    const auto it = base.find(key);
    if (it == base.end()) {
      throw ConfigError("unknown config key '" + path + "'");
    }
    if (it->is_object() && value.is_object()) {
      merge_config(*it, value, path);
    } else if (it->is_object() != value.is_object()) {
      throw ConfigError("config key '" + path + "' has the wrong shape");
    } else {
      *it = value;
    }
  }
}

std::string env_name(const std::string& dotted) {
  std::string name = "IDPR_";
  for (char ch : dotted) {
    name += ch == '.' ? '_'
                      : static_cast<char>(std::toupper(
                            static_cast<unsigned char>(ch)));
  }
  return name;
}

void apply_env_overrides(json& node, const std::string& prefix) {
  for (auto& [key, value] : node.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object()) {
      apply_env_overrides(value, path);
      continue;
    }
    const char* raw = std::getenv(env_name(path).c_str());
    if (raw == nullptr) continue;
    json parsed;
    try {
      parsed = json::parse(raw);
    } catch (const json::parse_error&) {
      parsed = std::string(raw);  // bare strings need no quotes
    }
    if (value.is_string() && !parsed.is_string()) {
      parsed = std::string(raw);
    }
    value = std::move(parsed);
  }
}

json effective_config_json(const std::string& path) {
  json effective = config_to_json(PipelineConfig{});
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json file;
    try {
      in >> file;
    } catch (const json::parse_error& e) {
      throw ConfigError("config file " + path + ": " + e.what());
    }
    if (!file.is_object()) {
      throw ConfigError("config file must hold a JSON object");
    }
    merge_config(effective, file, "");
  }
  apply_env_overrides(effective, "");
  return effective;
}

void validate_config(const PipelineConfig& c) {
  if (c.types_per_edge < 1) throw ConfigError("types_per_edge must be >= 1");
  if (c.stride < 1) throw ConfigError("stride must be >= 1");
  if (c.num_parts < 1) throw ConfigError("graph.num_parts must be >= 1");
  if (c.out_dir.empty()) throw ConfigError("out_dir must be set");
  if (c.mining_rounds < 1) throw ConfigError("mining.rounds must be >= 1");
  if (c.mined_per_positive < 0) {
    throw ConfigError("mining.per_positive must be >= 0");
  }
}

}  // namespace

PipelineConfig load_pipeline_config(const std::string& path) {
  PipelineConfig config = config_from_json(effective_config_json(path));
  validate_config(config);
  return config;
}

std::string pipeline_config_hash(const PipelineConfig& config) {
  const std::uint64_t h = fnv1a(config_to_json(config).dump());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

PartGraph config_base_graph(const PipelineConfig& config) {
  std::vector<std::pair<int, int>> edges = config.edges;
  std::vector<std::string> names = config.part_names;
  if (edges.empty()) {
    for (int i = 0; i + 1 < config.num_parts; ++i) edges.emplace_back(i, i + 1);
  }
  if (names.empty()) {
    for (int i = 0; i < config.num_parts; ++i) {
      names.push_back("part" + std::to_string(i));
    }
  }
  return PartGraph(config.num_parts, std::move(edges), config.root,
                   std::move(names), config.left_right_pairs);
}

PartGraph config_graph(const PipelineConfig& config) {
  PartGraph base = config_base_graph(config);
  return config.midway_parts ? add_midway_parts_graph(base) : base;
}

}  // namespace idpr
