#include "idpr/relation_model.hpp"

#include <limits>

#include "idpr/error.hpp"

namespace idpr {

RelationModel::RelationModel(const PartGraph& graph,
                             std::vector<std::vector<Vec2>> offsets_per_dir)
    : dirs_(std::move(offsets_per_dir)) {
  if (static_cast<int>(dirs_.size()) != graph.num_directed_edges()) {
    throw ConfigError("relation model has " + std::to_string(dirs_.size()) +
                      " directed edges, graph expects " +
                      std::to_string(graph.num_directed_edges()));
  }
  for (const auto& offsets : dirs_) {
    if (offsets.empty()) {
      throw ConfigError("every directed edge needs at least one relation type");
    }
    for (const Vec2& o : offsets) {
      if (!o.finite()) {
        throw ConfigError("relation mean offsets must be finite");
      }
    }
  }
}

RelationModel RelationModel::uniform(const PartGraph& graph, int type_count) {
  if (type_count < 1) {
    throw ConfigError("type_count must be >= 1");
  }
  std::vector<std::vector<Vec2>> dirs(graph.num_directed_edges());
  for (auto& offsets : dirs) {
    offsets.assign(type_count, Vec2{0.0, 0.0});
  }
  return RelationModel(graph, std::move(dirs));
}

const Vec2& RelationModel::mean_offset(int dir_id, int type) const {
  const auto& offsets = dirs_.at(dir_id);
  if (type < 0 || type >= static_cast<int>(offsets.size())) {
    throw InvalidTypeError("type " + std::to_string(type) +
                           " out of range for directed edge " +
                           std::to_string(dir_id));
  }
  return offsets[type];
}

int RelationModel::nearest_type(int dir_id, const Vec2& displacement) const {
  const auto& offsets = dirs_.at(dir_id);
  int best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (int t = 0; t < static_cast<int>(offsets.size()); ++t) {
    const double d2 = (displacement - offsets[t]).norm2();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = t;
    }
  }
  return best;
}

}  // namespace idpr
