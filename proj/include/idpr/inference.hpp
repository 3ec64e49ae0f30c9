#pragma once

#include <optional>
#include <vector>

#include "idpr/gdt.hpp"
#include "idpr/part_graph.hpp"
#include "idpr/relation_model.hpp"
#include "idpr/score_maps.hpp"
#include "idpr/weights.hpp"

namespace idpr {

// Score assigned to a part's map cells outside the mask window; large
// enough to lose against any real configuration, finite so DP arithmetic
// stays well defined.
inline constexpr double kMaskPenalty = -1e30;

// Rectangular window (inclusive corners) restricting one designated part's
// location; part -1 means the graph root.
struct RootMask {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;
  int part = -1;
};

struct InferenceResult {
  Pose pose;
  TypeAssignment types;
  double score = 0.0;
  std::vector<double> per_part_scores;  // weighted appearance at the chosen cells
};

// Combined concave quadratic of one edge at fixed types, expanded in the
// displacement delta = l_child - l_parent. Both directions' mean offsets
// are folded in exactly, so cost.*.r == 0 and `constant` carries the
// displacement-independent remainder.
struct CombinedQuad {
  QuadCost cost;
  double constant = 0.0;
};
CombinedQuad combined_quadratic(const Weights& weights,
                                const RelationModel& relations,
                                const PartGraph& graph, int parent, int child,
                                int t_forward, int t_reverse);

// Exact max-product DP over the tree: per child and type pair, one 2D
// distance transform over the child's subtree score (plus its outgoing
// type evidence), then the parent-side type evidence and the max over all
// type pairs; backtracking recovers the maximizing pose and types.
// `mode` must match weights.mode.
InferenceResult infer(const ScoreMapStack& maps, const Weights& weights,
                      const RelationModel& relations, const PartGraph& graph,
                      const std::optional<RootMask>& mask, ModelMode mode);

// Exhaustive maximization over every pose and type assignment, scoring
// each configuration through full_score. Guarded to
// cells^K * prod(T) <= 1e8 configurations.
InferenceResult brute_force_infer(const ScoreMapStack& maps,
                                  const Weights& weights,
                                  const RelationModel& relations,
                                  const PartGraph& graph,
                                  const std::optional<RootMask>& mask,
                                  ModelMode mode);

}  // namespace idpr
