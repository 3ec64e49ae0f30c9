#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "idpr/part_graph.hpp"
#include "idpr/relation_model.hpp"
#include "idpr/score_maps.hpp"
#include "idpr/weights.hpp"

namespace idpr {

// Flat slot numbering of every trainable parameter of one mode:
// unary per part, then (full mode) one type-evidence scale per directed
// edge, then four deformation coefficients per (directed edge, type), then
// (no-idprs mode) one prior per (directed edge, type), and the bias slot
// last.
class WeightLayout {
public:
  WeightLayout(const PartGraph& graph, const RelationModel& relations,
               ModelMode mode);

  ModelMode mode() const { return mode_; }
  int size() const { return size_; }

  int unary_slot(int part) const;
  int idpr_slot(int dir_id) const;             // full mode only
  int deform_slot(int dir_id, int type, int coeff) const;
  int prior_slot(int dir_id, int type) const;  // no-idprs mode only
  int bias_slot() const { return size_ - 1; }

  // Slots holding quadratic deformation coefficients; these are projected
  // to stay at or below -kQuadEps during training.
  const std::vector<int>& quadratic_slots() const { return quad_slots_; }

  std::vector<double> pack(const Weights& weights) const;
  Weights unpack(const std::vector<double>& flat) const;

private:
  ModelMode mode_;
  int num_parts_;
  std::vector<int> type_counts_;
  std::vector<int> idpr_base_;    // slot of each directed edge's scale
  std::vector<int> deform_base_;  // first deform slot per directed edge
  std::vector<int> prior_base_;
  std::vector<int> quad_slots_;
  int size_ = 0;
};

// Sparse feature vector; entries sorted by slot.
struct FeatureVector {
  std::vector<std::pair<int, double>> entries;

  double dot(const std::vector<double>& w) const {
    double acc = 0.0;
    for (const auto& [slot, value] : entries) acc += w[slot] * value;
    return acc;
  }
};

struct TrainingExample {
  FeatureVector features;
  int y = 1;  // +1 positive, -1 negative
};

struct SsvmConfig {
  double C = 1.0;
  int epochs = 50;
  double eta0 = 0.05;    // step size eta0 / (1 + lambda * t)
  double lambda = 1e-3;
  std::uint64_t seed = 0;
};

// Phi with <w, Phi> == full_score(pose, types) for every weight vector of
// the given mode, by construction.
FeatureVector build_feature_vector(const ScoreMapStack& maps, const Pose& pose,
                                   const TypeAssignment& types,
                                   const PartGraph& graph,
                                   const RelationModel& relations,
                                   ModelMode mode);

// 0.5*<w,w> + C * sum_n max(0, 1 - y_n <w, Phi_n>).
double objective(const std::vector<double>& w,
                 const std::vector<TrainingExample>& examples, double C);

// Projected stochastic subgradient descent on the hinge objective over an
// arbitrary flat parameterization; quad_slots are clamped to <= -kQuadEps
// after every step. Returns the epoch checkpoint with the lowest exact
// objective.
std::vector<double> train_weights_raw(
    const std::vector<TrainingExample>& examples, int dim,
    const std::vector<int>& quad_slots, const SsvmConfig& config);

Weights train_weights(const std::vector<TrainingExample>& examples,
                      const PartGraph& graph, const RelationModel& relations,
                      ModelMode mode, const SsvmConfig& config);

// One positive training instance, referencing externally owned maps.
struct LabeledInstance {
  const ScoreMapStack* maps = nullptr;
  Pose pose;
  TypeAssignment types;
};

// Negatives from two sources: the best-scoring configuration under the
// current weights on each negative image, and positives displaced so that
// every part moves more than half its longest incident limb (types
// re-derived from the displaced pose).
std::vector<TrainingExample> mine_negative_examples(
    const std::vector<LabeledInstance>& positives,
    const std::vector<const ScoreMapStack*>& negative_maps,
    const Weights& snapshot, const PartGraph& graph,
    const RelationModel& relations, int per_positive, double jitter_sigma,
    std::uint64_t seed);

}  // namespace idpr
