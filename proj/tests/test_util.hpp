// Random-instance builders shared by the unit and acceptance suites.
#pragma once

#include <algorithm>
#include <utility>
#include <vector>

#include "idpr/part_graph.hpp"
#include "idpr/relation_model.hpp"
#include "idpr/rng.hpp"
#include "idpr/score_maps.hpp"
#include "idpr/weights.hpp"

namespace testutil {

using idpr::PartGraph;
using idpr::Pose;
using idpr::RelationModel;
using idpr::Rng;
using idpr::ScoreMapStack;
using idpr::TypeAssignment;
using idpr::Vec2;
using idpr::Weights;

// Uniform random tree: each part attaches to a random earlier one, then the
// edge list is shuffled so directed-edge ids do not follow part order.
inline PartGraph random_tree(Rng& rng, int num_parts) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 1; i < num_parts; ++i) {
    edges.emplace_back(static_cast<int>(rng.next_below(i)), i);
  }
  for (std::size_t i = edges.size(); i > 1; --i) {
    std::swap(edges[i - 1], edges[rng.next_below(i)]);
  }
  const int root = static_cast<int>(rng.next_below(num_parts));
  return PartGraph(num_parts, std::move(edges), root);
}

inline RelationModel random_relations(Rng& rng, const PartGraph& graph,
                                      int max_types, double max_offset) {
  std::vector<std::vector<Vec2>> offsets(graph.num_directed_edges());
  for (auto& per_dir : offsets) {
    const int types = rng.uniform_int(1, max_types);
    for (int t = 0; t < types; ++t) {
      per_dir.emplace_back(rng.uniform(-max_offset, max_offset),
                           rng.uniform(-max_offset, max_offset));
    }
  }
  return RelationModel(graph, std::move(offsets));
}

inline Weights random_weights(Rng& rng, const PartGraph& graph,
                              const RelationModel& relations,
                              idpr::ModelMode mode) {
  Weights w = idpr::default_weights(mode, graph, relations);
  for (double& v : w.unary) v = rng.uniform(-1.0, 2.0);
  for (double& v : w.idpr) v = rng.uniform(-1.0, 2.0);
  for (auto& per_dir : w.deform) {
    for (auto& coeffs : per_dir) {
      coeffs[0] = rng.uniform(-1.0, 1.0);
      coeffs[1] = -rng.uniform(idpr::kQuadEps, 2.0);
      coeffs[2] = rng.uniform(-1.0, 1.0);
      coeffs[3] = -rng.uniform(idpr::kQuadEps, 2.0);
    }
  }
  for (auto& per_dir : w.prior_bias) {
    for (double& v : per_dir) v = rng.uniform(-1.0, 1.0);
  }
  w.bias = rng.uniform(-1.0, 1.0);
  return w;
}

inline ScoreMapStack random_maps(Rng& rng, const PartGraph& graph,
                                 const RelationModel& relations, int width,
                                 int height) {
  ScoreMapStack maps =
      idpr::make_score_map_stack(graph, relations, width, height, 1);
  for (int i = 0; i < graph.num_parts(); ++i) {
    for (float& v : maps.appearance(i).cells()) {
      v = static_cast<float>(rng.uniform(-1.0, 1.0));
    }
  }
  for (int d = 0; d < graph.num_directed_edges(); ++d) {
    for (int t = 0; t < relations.type_count(d); ++t) {
      for (float& v : maps.idpr(d, t).cells()) {
        v = static_cast<float>(rng.uniform(-1.0, 1.0));
      }
    }
  }
  return maps;
}

// Pose on the integer lattice of a width x height grid.
inline Pose lattice_pose(Rng& rng, int num_parts, int width, int height) {
  Pose pose;
  for (int i = 0; i < num_parts; ++i) {
    pose.joints.emplace_back(static_cast<double>(rng.next_below(width)),
                             static_cast<double>(rng.next_below(height)));
  }
  return pose;
}

// Pose with real-valued joints strictly inside the grid.
inline Pose real_pose(Rng& rng, int num_parts, int width, int height) {
  Pose pose;
  for (int i = 0; i < num_parts; ++i) {
    pose.joints.emplace_back(rng.uniform(0.0, width - 1e-9),
                             rng.uniform(0.0, height - 1e-9));
  }
  return pose;
}

inline TypeAssignment random_types(Rng& rng, const RelationModel& relations) {
  TypeAssignment types;
  for (int d = 0; d < relations.num_directed_edges(); ++d) {
    types.types.push_back(
        static_cast<int>(rng.next_below(relations.type_count(d))));
  }
  return types;
}

}  // namespace testutil
