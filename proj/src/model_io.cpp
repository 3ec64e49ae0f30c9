#include "idpr/model_io.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "idpr/error.hpp"

namespace idpr {
namespace {

using nlohmann::json;

constexpr int kModelVersion = 1;

const json& require(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) {
    throw DataError(std::string("model file missing field '") + key + "'");
  }
  return *it;
}

json pairs_to_json(const std::vector<std::pair<int, int>>& pairs) {
  json out = json::array();
  for (const auto& [a, b] : pairs) out.push_back(json::array({a, b}));
  return out;
}

std::vector<std::pair<int, int>> pairs_from_json(const json& j) {
  std::vector<std::pair<int, int>> out;
  for (const json& e : j) {
    if (!e.is_array() || e.size() != 2) {
      throw DataError("model file: malformed index pair");
    }
    out.emplace_back(e[0].get<int>(), e[1].get<int>());
  }
  return out;
}

const char* feature_kind_name(PatchFeatureConfig::Kind kind) {
  return kind == PatchFeatureConfig::Kind::kRawPixels ? "raw-pixels"
                                                : "gradient-histogram";
}

PatchFeatureConfig::Kind feature_kind_from(const std::string& name) {
  if (name == "raw-pixels") return PatchFeatureConfig::Kind::kRawPixels;
  if (name == "gradient-histogram") {
    return PatchFeatureConfig::Kind::kGradientHistogram;
  }
  throw DataError("model file: unknown feature kind '" + name + "'");
}

json classifier_to_json(const PatchClassifier& c) {
  const ClassifierConfig& cfg = c.config();
  const PatchClassifier::Params& p = c.params();
  json j;
  j["config"] = {{"patch_side", cfg.patch_side},
                 {"feature_kind", feature_kind_name(cfg.features.kind)},
                 {"hist_cells", cfg.features.hist_cells},
                 {"hist_bins", cfg.features.hist_bins},
                 {"hidden_units", cfg.hidden_units},
                 {"epochs", cfg.epochs},
                 {"learning_rate", cfg.learning_rate},
                 {"lr_decay", cfg.lr_decay},
                 {"batch_size", cfg.batch_size},
                 {"validation_fraction", cfg.validation_fraction}};
  j["params"] = {{"input_dim", p.input_dim}, {"hidden", p.hidden},
                 {"classes", p.classes},     {"w1", p.w1},
                 {"b1", p.b1},               {"w2", p.w2},
                 {"b2", p.b2}};
  return j;
}

PatchClassifier classifier_from_json(const json& j) {
  const json& cfg_j = require(j, "config");
  ClassifierConfig cfg;
  cfg.patch_side = require(cfg_j, "patch_side").get<int>();
  cfg.features.kind =
      feature_kind_from(require(cfg_j, "feature_kind").get<std::string>());
  cfg.features.hist_cells = require(cfg_j, "hist_cells").get<int>();
  cfg.features.hist_bins = require(cfg_j, "hist_bins").get<int>();
  cfg.hidden_units = require(cfg_j, "hidden_units").get<int>();
  cfg.epochs = require(cfg_j, "epochs").get<int>();
  cfg.learning_rate = require(cfg_j, "learning_rate").get<double>();
  cfg.lr_decay = require(cfg_j, "lr_decay").get<double>();
  cfg.batch_size = require(cfg_j, "batch_size").get<int>();
  cfg.validation_fraction =
      require(cfg_j, "validation_fraction").get<double>();

  const json& p_j = require(j, "params");
  PatchClassifier::Params p;
  p.input_dim = require(p_j, "input_dim").get<int>();
  p.hidden = require(p_j, "hidden").get<int>();
  p.classes = require(p_j, "classes").get<int>();
  p.w1 = require(p_j, "w1").get<std::vector<double>>();
  p.b1 = require(p_j, "b1").get<std::vector<double>>();
  p.w2 = require(p_j, "w2").get<std::vector<double>>();
  p.b2 = require(p_j, "b2").get<std::vector<double>>();
  return PatchClassifier(cfg, std::move(p));
}

json weights_to_json(const Weights& w) {
  json j;
  j["mode"] = to_string(w.mode);
  j["unary"] = w.unary;
  j["bias"] = w.bias;
  if (w.mode == ModelMode::kFull) j["idpr"] = w.idpr;
  if (w.mode != ModelMode::kUnaryOnly) {
    json deform = json::array();
    for (const auto& per_type : w.deform) {
      json types = json::array();
      for (const auto& coeffs : per_type) {
        types.push_back(json::array({coeffs[0], coeffs[1], coeffs[2],
                                     coeffs[3]}));
      }
      deform.push_back(std::move(types));
    }
    j["deform"] = std::move(deform);
  }
  if (w.mode == ModelMode::kNoIdprs) j["prior_bias"] = w.prior_bias;
  return j;
}

Weights weights_from_json(const json& j) {
  Weights w;
  w.mode = parse_mode(require(j, "mode").get<std::string>());
  w.unary = require(j, "unary").get<std::vector<double>>();
  w.bias = require(j, "bias").get<double>();
  if (w.mode == ModelMode::kFull) {
    w.idpr = require(j, "idpr").get<std::vector<double>>();
  }
  if (w.mode != ModelMode::kUnaryOnly) {
    for (const json& per_type : require(j, "deform")) {
      std::vector<std::array<double, 4>> types;
      for (const json& coeffs : per_type) {
        if (!coeffs.is_array() || coeffs.size() != 4) {
          throw DataError("model file: deformation entries need 4 numbers");
        }
        types.push_back({{coeffs[0].get<double>(), coeffs[1].get<double>(),
                          coeffs[2].get<double>(), coeffs[3].get<double>()}});
      }
      w.deform.push_back(std::move(types));
    }
  }
  if (w.mode == ModelMode::kNoIdprs) {
    w.prior_bias =
        require(j, "prior_bias").get<std::vector<std::vector<double>>>();
  }
  return w;
}

}  // namespace

void save_model(const Model& model, const std::string& path) {
  json j;
  j["format"] = "idpr-model";
  j["version"] = kModelVersion;
  j["stride"] = model.stride;

  json graph;
  graph["num_parts"] = model.graph.num_parts();
  graph["root"] = model.graph.root();
  graph["edges"] = pairs_to_json(model.graph.edges());
  graph["part_names"] = model.graph.part_names();
  graph["left_right_pairs"] = pairs_to_json(model.graph.left_right_pairs());
  j["graph"] = std::move(graph);

  json relations = json::array();
  for (int d = 0; d < model.relations.num_directed_edges(); ++d) {
    json offsets = json::array();
    for (const Vec2& c : model.relations.mean_offsets(d)) {
      offsets.push_back(json::array({c.x, c.y}));
    }
    relations.push_back(std::move(offsets));
  }
  j["relations"] = std::move(relations);
  j["weights"] = weights_to_json(model.weights);
  j["classifier"] = classifier_to_json(model.classifier);

  std::ofstream out(path);
  if (!out) throw DataError("cannot write model file " + path);
  out << j.dump(2) << '\n';
  if (!out) throw DataError("failed writing model file " + path);
}

void save_classifier(const PatchClassifier& classifier,
                     const std::string& path) {
  json j;
  j["format"] = "idpr-classifier";
  j["version"] = kModelVersion;
  j["classifier"] = classifier_to_json(classifier);
  std::ofstream out(path);
  if (!out) throw DataError("cannot write classifier file " + path);
  out << j.dump(2) << '\n';
  if (!out) throw DataError("failed writing classifier file " + path);
}

PatchClassifier load_classifier(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open classifier file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw DataError("classifier file " + path + ": " + e.what());
  }
  if (require(j, "format").get<std::string>() != "idpr-classifier") {
    throw DataError("not a classifier file: " + path);
  }
  if (require(j, "version").get<int>() != kModelVersion) {
    throw DataError("unsupported classifier version in " + path);
  }
  return classifier_from_json(require(j, "classifier"));
}

Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw DataError("model file " + path + ": " + e.what());
  }
  if (require(j, "format").get<std::string>() != "idpr-model") {
    throw DataError("not a model file: " + path);
  }
  if (require(j, "version").get<int>() != kModelVersion) {
    throw DataError("unsupported model version in " + path);
  }

  Model model;
  const json& graph = require(j, "graph");
  model.graph = PartGraph(
      require(graph, "num_parts").get<int>(),
      pairs_from_json(require(graph, "edges")),
      require(graph, "root").get<int>(),
      require(graph, "part_names").get<std::vector<std::string>>(),
      pairs_from_json(require(graph, "left_right_pairs")));

  std::vector<std::vector<Vec2>> offsets;
  for (const json& per_dir : require(j, "relations")) {
    std::vector<Vec2> centers;
    for (const json& c : per_dir) {
      if (!c.is_array() || c.size() != 2) {
        throw DataError("model file: malformed relation offset");
      }
      centers.emplace_back(c[0].get<double>(), c[1].get<double>());
    }
    offsets.push_back(std::move(centers));
  }
  model.relations = RelationModel(model.graph, std::move(offsets));
  model.weights = weights_from_json(require(j, "weights"));
  validate_weights(model.weights, model.graph, model.relations);
  model.classifier = classifier_from_json(require(j, "classifier"));
  model.stride = require(j, "stride").get<int>();
  return model;
}

}  // namespace idpr
