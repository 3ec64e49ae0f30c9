#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "idpr/part_graph.hpp"
#include "idpr/relation_model.hpp"
#include "idpr/vec2.hpp"

namespace idpr {

struct ClusterResult {
  std::vector<Vec2> centers;
  std::vector<int> labels;  // nearest center per input point
  double inertia = 0.0;     // within-cluster sum of squared distances
};

// Lloyd iterations from a seeded k-means++ start. Stops when no center
// moves more than 1e-7 or after max_iters. Empty clusters are re-seeded to
// the point farthest from its current center; nearest-center ties go to
// the smaller index.
ClusterResult kmeans_2d(const std::vector<Vec2>& points, int num_clusters,
                        std::uint64_t seed, int max_iters = 100);

// Per directed edge (i -> j): cluster the displacements l_j - l_i over all
// poses into type_counts[dir] clusters; the centers become that
// direction's mean offsets and each pose is labeled by its nearest center.
// Each direction draws its own seed, so results do not depend on edge
// processing order.
std::pair<RelationModel, std::vector<TypeAssignment>> derive_types(
    const std::vector<Pose>& poses, const PartGraph& graph,
    const std::vector<int>& type_counts, std::uint64_t seed);

std::pair<RelationModel, std::vector<TypeAssignment>> derive_types(
    const std::vector<Pose>& poses, const PartGraph& graph, int type_count,
    std::uint64_t seed);

}  // namespace idpr
