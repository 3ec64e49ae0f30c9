#include "idpr/ssvm.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <string>

#include "idpr/error.hpp"
#include "idpr/inference.hpp"
#include "idpr/rng.hpp"
#include "idpr/score.hpp"

namespace idpr {

WeightLayout::WeightLayout(const PartGraph& graph,
                           const RelationModel& relations, ModelMode mode)
    : mode_(mode), num_parts_(graph.num_parts()) {
  if (!relations.consistent_with(graph)) {
    throw ConfigError("relation model does not match graph");
  }
  const int num_dirs = graph.num_directed_edges();
  type_counts_.resize(num_dirs);
  for (int d = 0; d < num_dirs; ++d) {
    type_counts_[d] = relations.type_count(d);
  }
  int next = num_parts_;
  if (mode_ == ModelMode::kFull) {
    idpr_base_.resize(num_dirs);
    for (int d = 0; d < num_dirs; ++d) idpr_base_[d] = next++;
  }
  if (mode_ != ModelMode::kUnaryOnly) {
    deform_base_.resize(num_dirs);
    for (int d = 0; d < num_dirs; ++d) {
      deform_base_[d] = next;
      next += 4 * type_counts_[d];
      for (int t = 0; t < type_counts_[d]; ++t) {
        quad_slots_.push_back(deform_base_[d] + 4 * t + 1);
        quad_slots_.push_back(deform_base_[d] + 4 * t + 3);
      }
    }
  }
  if (mode_ == ModelMode::kNoIdprs) {
    prior_base_.resize(num_dirs);
    for (int d = 0; d < num_dirs; ++d) {
      prior_base_[d] = next;
      next += type_counts_[d];
    }
  }
  size_ = next + 1;  // bias slot
}

int WeightLayout::unary_slot(int part) const {
  if (part < 0 || part >= num_parts_) {
    throw BoundsError("part index out of range");
  }
  return part;
}

int WeightLayout::idpr_slot(int dir_id) const {
  if (mode_ != ModelMode::kFull) {
    throw ConfigError("type-evidence slots exist only in full mode");
  }
  return idpr_base_.at(dir_id);
}

int WeightLayout::deform_slot(int dir_id, int type, int coeff) const {
  if (mode_ == ModelMode::kUnaryOnly) {
    throw ConfigError("unary-only mode has no deformation slots");
  }
  if (type < 0 || type >= type_counts_.at(dir_id) || coeff < 0 || coeff > 3) {
    throw ConfigError("deformation slot out of range");
  }
  return deform_base_[dir_id] + 4 * type + coeff;
}

int WeightLayout::prior_slot(int dir_id, int type) const {
  if (mode_ != ModelMode::kNoIdprs) {
    throw ConfigError("prior slots exist only in no-idprs mode");
  }
  if (type < 0 || type >= type_counts_.at(dir_id)) {
    throw ConfigError("prior slot out of range");
  }
  return prior_base_[dir_id] + type;
}

std::vector<double> WeightLayout::pack(const Weights& weights) const {
  if (weights.mode != mode_) {
    throw ConfigError("weights mode does not match layout");
  }
  std::vector<double> flat(size_, 0.0);
  for (int i = 0; i < num_parts_; ++i) flat[i] = weights.unary.at(i);
  const int num_dirs = static_cast<int>(type_counts_.size());
  if (mode_ == ModelMode::kFull) {
    for (int d = 0; d < num_dirs; ++d) {
      flat[idpr_base_[d]] = weights.idpr.at(d);
    }
  }
  if (mode_ != ModelMode::kUnaryOnly) {
    for (int d = 0; d < num_dirs; ++d) {
      for (int t = 0; t < type_counts_[d]; ++t) {
        for (int c = 0; c < 4; ++c) {
          flat[deform_base_[d] + 4 * t + c] = weights.deform.at(d).at(t)[c];
        }
      }
    }
  }
  if (mode_ == ModelMode::kNoIdprs) {
    for (int d = 0; d < num_dirs; ++d) {
      for (int t = 0; t < type_counts_[d]; ++t) {
        flat[prior_base_[d] + t] = weights.prior_bias.at(d).at(t);
      }
    }
  }
  flat[bias_slot()] = weights.bias;
  return flat;
}

Weights WeightLayout::unpack(const std::vector<double>& flat) const {
  if (static_cast<int>(flat.size()) != size_) {
    throw ConfigError("flat weight vector does not match layout size");
  }
  Weights weights;
  weights.mode = mode_;
  weights.unary.assign(flat.begin(), flat.begin() + num_parts_);
  const int num_dirs = static_cast<int>(type_counts_.size());
  if (mode_ == ModelMode::kFull) {
    weights.idpr.resize(num_dirs);
    for (int d = 0; d < num_dirs; ++d) weights.idpr[d] = flat[idpr_base_[d]];
  }
  if (mode_ != ModelMode::kUnaryOnly) {
    weights.deform.resize(num_dirs);
    for (int d = 0; d < num_dirs; ++d) {
      weights.deform[d].resize(type_counts_[d]);
      for (int t = 0; t < type_counts_[d]; ++t) {
        for (int c = 0; c < 4; ++c) {
          weights.deform[d][t][c] = flat[deform_base_[d] + 4 * t + c];
        }
      }
    }
  }
  if (mode_ == ModelMode::kNoIdprs) {
    weights.prior_bias.resize(num_dirs);
    for (int d = 0; d < num_dirs; ++d) {
      weights.prior_bias[d].resize(type_counts_[d]);
      for (int t = 0; t < type_counts_[d]; ++t) {
        weights.prior_bias[d][t] = flat[prior_base_[d] + t];
      }
    }
  }
  weights.bias = flat[bias_slot()];
  return weights;
}

FeatureVector build_feature_vector(const ScoreMapStack& maps, const Pose& pose,
                                   const TypeAssignment& types,
                                   const PartGraph& graph,
                                   const RelationModel& relations,
                                   ModelMode mode) {
  if (pose.size() != graph.num_parts() ||
      static_cast<int>(types.types.size()) != graph.num_directed_edges()) {
    throw ConfigError("pose or type assignment does not match graph");
  }
  const WeightLayout layout(graph, relations, mode);
  FeatureVector phi;

  std::vector<std::pair<int, int>> cells(graph.num_parts());
  for (int i = 0; i < graph.num_parts(); ++i) {
    cells[i] = snap_to_grid(pose.joints[i], maps.width(), maps.height());
    phi.entries.emplace_back(
        layout.unary_slot(i),
        static_cast<double>(maps.appearance(i)(cells[i].first,
                                               cells[i].second)));
  }
  if (mode == ModelMode::kFull) {
    for (int d = 0; d < graph.num_directed_edges(); ++d) {
      const auto [from, to] = graph.directed_endpoints(d);
      (void)to;
      const int t = types.types[d];
      phi.entries.emplace_back(
          layout.idpr_slot(d),
          static_cast<double>(maps.idpr(d, t)(cells[from].first,
                                              cells[from].second)));
    }
  }
  if (mode != ModelMode::kUnaryOnly) {
    for (int d = 0; d < graph.num_directed_edges(); ++d) {
      const auto [from, to] = graph.directed_endpoints(d);
      const int t = types.types[d];
      const Vec2 delta =
          pose.joints[to] - pose.joints[from] - relations.mean_offset(d, t);
      const auto psi = deformation_features(delta);
      for (int c = 0; c < 4; ++c) {
        phi.entries.emplace_back(layout.deform_slot(d, t, c), psi[c]);
      }
    }
  }
  if (mode == ModelMode::kNoIdprs) {
    for (int d = 0; d < graph.num_directed_edges(); ++d) {
      phi.entries.emplace_back(layout.prior_slot(d, types.types[d]), 1.0);
    }
  }
  phi.entries.emplace_back(layout.bias_slot(), 1.0);
  std::sort(phi.entries.begin(), phi.entries.end());
  return phi;
}

double objective(const std::vector<double>& w,
                 const std::vector<TrainingExample>& examples, double C) {
  double reg = 0.0;
  for (double v : w) reg += v * v;
  double hinge = 0.0;
  for (const TrainingExample& ex : examples) {
    hinge += std::max(0.0, 1.0 - ex.y * ex.features.dot(w));
  }
  return 0.5 * reg + C * hinge;
}

std::vector<double> train_weights_raw(
    const std::vector<TrainingExample>& examples, int dim,
    const std::vector<int>& quad_slots, const SsvmConfig& config) {
  if (config.C <= 0.0 || config.epochs < 1 || config.eta0 <= 0.0 ||
      config.lambda < 0.0) {
    throw ConfigError("training hyperparameters out of range");
  }
  bool has_pos = false;
  bool has_neg = false;
  for (const TrainingExample& ex : examples) {
    if (ex.y != 1 && ex.y != -1) {
      throw ConfigError("labels must be +1 or -1");
    }
    (ex.y == 1 ? has_pos : has_neg) = true;
    for (const auto& [slot, value] : ex.features.entries) {
      if (slot < 0 || slot >= dim || !std::isfinite(value)) {
        throw ConfigError("feature slot outside the weight vector");
      }
    }
  }
  if (!has_pos || !has_neg) {
    throw DataError("training needs both positive and negative examples");
  }

  const double num = static_cast<double>(examples.size());
  std::vector<double> w(dim, 0.0);
  auto project = [&] {
    for (int q : quad_slots) w[q] = std::min(w[q], -kQuadEps);
  };
  project();

  Rng rng(config.seed);
  std::vector<int> order(examples.size());
  std::iota(order.begin(), order.end(), 0);

  std::vector<double> best = w;
  double best_obj = objective(w, examples, config.C);

  std::uint64_t step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (int n = static_cast<int>(order.size()) - 1; n > 0; --n) {
      std::swap(order[n], order[rng.next_below(static_cast<std::uint64_t>(n + 1))]);
    }
    for (int n : order) {
      const TrainingExample& ex = examples[n];
      const double eta =
          config.eta0 / (1.0 + config.lambda * static_cast<double>(step));
      ++step;
      const double margin = ex.y * ex.features.dot(w);
      const double decay = 1.0 - eta / num;
      for (double& v : w) v *= decay;
      if (margin < 1.0) {
        const double scale = eta * config.C * ex.y;
        for (const auto& [slot, value] : ex.features.entries) {
          w[slot] += scale * value;
        }
      }
      project();
    }
    const double obj = objective(w, examples, config.C);
    if (obj < best_obj) {
      best_obj = obj;
      best = w;
    }
  }
  return best;
}

Weights train_weights(const std::vector<TrainingExample>& examples,
                      const PartGraph& graph, const RelationModel& relations,
                      ModelMode mode, const SsvmConfig& config) {
  const WeightLayout layout(graph, relations, mode);
  const std::vector<double> flat = train_weights_raw(
      examples, layout.size(), layout.quadratic_slots(), config);
  Weights weights = layout.unpack(flat);
  validate_weights(weights, graph, relations);
  return weights;
}

std::vector<TrainingExample> mine_negative_examples(
    const std::vector<LabeledInstance>& positives,
    const std::vector<const ScoreMapStack*>& negative_maps,
    const Weights& snapshot, const PartGraph& graph,
    const RelationModel& relations, int per_positive, double jitter_sigma,
    std::uint64_t seed) {
  if (negative_maps.empty()) {
    throw DataError("negative mining needs at least one negative image");
  }
  std::vector<TrainingExample> mined;

  for (const ScoreMapStack* maps : negative_maps) {
    const InferenceResult hit =
        infer(*maps, snapshot, relations, graph, std::nullopt, snapshot.mode);
    mined.push_back(TrainingExample{
        build_feature_vector(*maps, hit.pose, hit.types, graph, relations,
                             snapshot.mode),
        -1});
  }

  // Per-part displacement floor: half the longest ground-truth limb
  // incident to the part.
  Rng rng(seed);
  int skipped = 0;
  for (const LabeledInstance& pos : positives) {
    const int w = pos.maps->width();
    const int h = pos.maps->height();
    std::vector<double> floor_dist(graph.num_parts(), 0.0);
    for (const auto& [a, b] : graph.edges()) {
      const double len = (pos.pose.joints[a] - pos.pose.joints[b]).norm();
      floor_dist[a] = std::max(floor_dist[a], 0.5 * len);
      floor_dist[b] = std::max(floor_dist[b], 0.5 * len);
    }
    double min_x = 1e300, min_y = 1e300, max_x = -1e300, max_y = -1e300;
    for (const Vec2& j : pos.pose.joints) {
      min_x = std::min(min_x, j.x);
      min_y = std::min(min_y, j.y);
      max_x = std::max(max_x, j.x);
      max_y = std::max(max_y, j.y);
    }

    for (int m = 0; m < per_positive; ++m) {
      bool accepted = false;
      for (int attempt = 0; attempt < 1000 && !accepted; ++attempt) {
        const double dx = rng.uniform(-min_x, (w - 1e-6) - max_x);
        const double dy = rng.uniform(-min_y, (h - 1e-6) - max_y);
        Pose displaced;
        displaced.joints.resize(pos.pose.size());
        bool ok = true;
        for (int i = 0; i < pos.pose.size(); ++i) {
          Vec2 p = pos.pose.joints[i] + Vec2{dx, dy};
          if (jitter_sigma > 0.0) {
            p = p + Vec2{jitter_sigma * rng.normal(),
                         jitter_sigma * rng.normal()};
          }
          if (p.x < 0.0 || p.x >= w || p.y < 0.0 || p.y >= h) {
            ok = false;
            break;
          }
          if ((p - pos.pose.joints[i]).norm() <= floor_dist[i]) {
            ok = false;
            break;
          }
          displaced.joints[i] = p;
        }
        if (!ok) continue;

        TypeAssignment types;
        types.types.resize(graph.num_directed_edges());
        for (int d = 0; d < graph.num_directed_edges(); ++d) {
          const auto [from, to] = graph.directed_endpoints(d);
          types.types[d] = relations.nearest_type(
              d, displaced.joints[to] - displaced.joints[from]);
        }
        mined.push_back(TrainingExample{
            build_feature_vector(*pos.maps, displaced, types, graph,
                                 relations, snapshot.mode),
            -1});
        accepted = true;
      }
      if (!accepted) ++skipped;
    }
  }
  if (skipped > 0) {
    std::cerr << "warning: could not displace " << skipped
              << " positives far enough for mining\n";
  }
  return mined;
}

}  // namespace idpr
