#include "idpr/typelearn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "idpr/error.hpp"
#include "idpr/rng.hpp"

namespace idpr {

namespace {

int nearest_center(const std::vector<Vec2>& centers, const Vec2& p) {
  int best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (int c = 0; c < static_cast<int>(centers.size()); ++c) {
    const double d2 = (p - centers[c]).norm2();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = c;
    }
  }
  return best;
}

std::size_t count_distinct(std::vector<Vec2> points) {
  std::sort(points.begin(), points.end(), [](const Vec2& a, const Vec2& b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  });
  std::size_t distinct = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i == 0 || points[i].x != points[i - 1].x ||
        points[i].y != points[i - 1].y) {
      ++distinct;
    }
  }
  return distinct;
}

std::vector<Vec2> kmeans_pp_init(const std::vector<Vec2>& points,
                                 int num_clusters, Rng& rng) {
  std::vector<Vec2> centers;
  centers.reserve(num_clusters);
  centers.push_back(points[rng.next_below(points.size())]);
  std::vector<double> d2(points.size());
  while (static_cast<int>(centers.size()) < num_clusters) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      d2[i] = (points[i] - centers[nearest_center(centers, points[i])]).norm2();
      total += d2[i];
    }
    double pick = rng.next_double() * total;
    std::size_t chosen = points.size() - 1;
    for (std::size_t i = 0; i < points.size(); ++i) {
      pick -= d2[i];
      if (pick <= 0.0) {
        chosen = i;
        break;
      }
    }
    centers.push_back(points[chosen]);
  }
  return centers;
}

}  // namespace

ClusterResult kmeans_2d(const std::vector<Vec2>& points, int num_clusters,
                        std::uint64_t seed, int max_iters) {
  if (points.empty()) {
    throw DataError("k-means needs at least one point");
  }
  if (num_clusters < 1) {
    throw ConfigError("cluster count must be >= 1");
  }
  for (const Vec2& p : points) {
    if (!p.finite()) {
      throw DataError("k-means input contains a non-finite point");
    }
  }
  if (count_distinct(points) < static_cast<std::size_t>(num_clusters)) {
    throw DegenerateClusterError(
        "asked for " + std::to_string(num_clusters) +
        " clusters but the data has fewer distinct points");
  }

  Rng rng(seed);
  std::vector<Vec2> centers = kmeans_pp_init(points, num_clusters, rng);
  std::vector<int> labels(points.size(), 0);
  std::vector<Vec2> sums(num_clusters);
  std::vector<int> counts(num_clusters);

  for (int iter = 0; iter < max_iters; ++iter) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      labels[i] = nearest_center(centers, points[i]);
    }
    std::fill(sums.begin(), sums.end(), Vec2{0.0, 0.0});
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      sums[labels[i]] = sums[labels[i]] + points[i];
      ++counts[labels[i]];
    }
    std::vector<Vec2> next(num_clusters);
    for (int c = 0; c < num_clusters; ++c) {
      next[c] = counts[c] > 0
                    ? Vec2{sums[c].x / counts[c], sums[c].y / counts[c]}
                    : centers[c];
    }
    // Re-seed empty clusters with the worst-assigned point.
    for (int c = 0; c < num_clusters; ++c) {
      if (counts[c] > 0) continue;
      double worst = -1.0;
      std::size_t worst_i = 0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        const double d = (points[i] - next[labels[i]]).norm2();
        if (d > worst) {
          worst = d;
          worst_i = i;
        }
      }
      next[c] = points[worst_i];
    }
    double moved = 0.0;
    for (int c = 0; c < num_clusters; ++c) {
      moved = std::max(moved, (next[c] - centers[c]).norm());
    }
    centers = std::move(next);
    if (moved < 1e-7) break;
  }

  ClusterResult result;
  result.centers = std::move(centers);
  result.labels.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    result.labels[i] = nearest_center(result.centers, points[i]);
    result.inertia += (points[i] - result.centers[result.labels[i]]).norm2();
  }
  return result;
}

std::pair<RelationModel, std::vector<TypeAssignment>> derive_types(
    const std::vector<Pose>& poses, const PartGraph& graph,
    const std::vector<int>& type_counts, std::uint64_t seed) {
  if (poses.empty()) {
    throw DataError("cannot derive relation types without training poses");
  }
  if (static_cast<int>(type_counts.size()) != graph.num_directed_edges()) {
    throw ConfigError("need one type count per directed edge");
  }
  for (const Pose& pose : poses) {
    if (static_cast<int>(pose.size()) != graph.num_parts()) {
      throw DataError("pose joint count does not match graph");
    }
  }

  std::vector<std::vector<Vec2>> offsets(graph.num_directed_edges());
  std::vector<TypeAssignment> assignments(poses.size());
  for (auto& a : assignments) {
    a.types.assign(graph.num_directed_edges(), 0);
  }

  std::vector<Vec2> displacements(poses.size());
  for (int d = 0; d < graph.num_directed_edges(); ++d) {
    const auto [from, to] = graph.directed_endpoints(d);
    for (std::size_t n = 0; n < poses.size(); ++n) {
      displacements[n] = poses[n].joints[to] - poses[n].joints[from];
    }
    ClusterResult clusters =
        kmeans_2d(displacements, type_counts[d],
                  derive_seed(seed, static_cast<std::uint64_t>(d)));
    offsets[d] = std::move(clusters.centers);
    for (std::size_t n = 0; n < poses.size(); ++n) {
      assignments[n].types[d] = clusters.labels[n];
    }
  }
  return {RelationModel(graph, std::move(offsets)), std::move(assignments)};
}

std::pair<RelationModel, std::vector<TypeAssignment>> derive_types(
    const std::vector<Pose>& poses, const PartGraph& graph, int type_count,
    std::uint64_t seed) {
  return derive_types(
      poses, graph,
      std::vector<int>(graph.num_directed_edges(), type_count), seed);
}

}  // namespace idpr
