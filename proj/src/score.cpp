#include "idpr/score.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "idpr/error.hpp"

namespace idpr {

std::pair<int, int> snap_to_grid(const Vec2& loc, int width, int height) {
  if (!loc.finite()) {
    throw BoundsError("non-finite location");
  }
  const int x = static_cast<int>(std::floor(loc.x));
  const int y = static_cast<int>(std::floor(loc.y));
  if (x < 0 || x >= width || y < 0 || y >= height) {
    throw BoundsError("location (" + std::to_string(loc.x) + ", " +
                      std::to_string(loc.y) + ") outside " +
                      std::to_string(width) + "x" + std::to_string(height) +
                      " grid");
  }
  return {x, y};
}

double full_score(const Pose& pose, const TypeAssignment& types,
                  const ScoreMapStack& maps, const Weights& weights,
                  const PartGraph& graph, const RelationModel& relations) {
  const int num_parts = graph.num_parts();
  if (static_cast<int>(pose.size()) != num_parts) {
    throw ConfigError("pose has " + std::to_string(pose.size()) +
                      " joints, graph has " + std::to_string(num_parts) +
                      " parts");
  }
  if (static_cast<int>(types.types.size()) != graph.num_directed_edges()) {
    throw ConfigError("type assignment does not cover the directed edges");
  }
  if (maps.num_parts() != num_parts ||
      maps.num_directed_edges() != graph.num_directed_edges()) {
    throw ConfigError("score maps do not match graph");
  }
  if (static_cast<int>(weights.unary.size()) != num_parts) {
    throw ConfigError("weights do not match graph");
  }

  std::vector<std::pair<int, int>> cells(num_parts);
  double score = weights.bias;
  for (int i = 0; i < num_parts; ++i) {
    cells[i] = snap_to_grid(pose.joints[i], maps.width(), maps.height());
    score += weights.unary[i] *
             static_cast<double>(maps.appearance(i)(cells[i].first,
                                                    cells[i].second));
  }
  if (weights.mode == ModelMode::kUnaryOnly) {
    return score;
  }

  for (int d = 0; d < graph.num_directed_edges(); ++d) {
    const auto [from, to] = graph.directed_endpoints(d);
    const int t = types.types[d];
    const Vec2 delta =
        pose.joints[to] - pose.joints[from] - relations.mean_offset(d, t);
    const auto psi = deformation_features(delta);
    const auto& w = weights.deform.at(d).at(t);
    score += w[0] * psi[0] + w[1] * psi[1] + w[2] * psi[2] + w[3] * psi[3];
    if (weights.mode == ModelMode::kFull) {
      score += weights.idpr.at(d) *
               static_cast<double>(maps.idpr(d, t)(cells[from].first,
                                                   cells[from].second));
    } else {
      score += weights.prior_bias.at(d).at(t);
    }
  }
  return score;
}

}  // namespace idpr
