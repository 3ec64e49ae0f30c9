#pragma once

#include <vector>

#include "idpr/part_graph.hpp"
#include "idpr/vec2.hpp"

namespace idpr {

// Mixture of spatial relations per directed edge: the learned cluster
// centers act as mean relative offsets, one per type.
class RelationModel {
public:
  RelationModel() = default;

  // offsets_per_dir is indexed by directed edge id and holds the mean
  // offsets (cluster centers) for every type of that direction.
  RelationModel(const PartGraph& graph,
                std::vector<std::vector<Vec2>> offsets_per_dir);

  // Uniform type count with zero offsets; useful as a starting point.
  static RelationModel uniform(const PartGraph& graph, int type_count);

  int num_directed_edges() const { return static_cast<int>(dirs_.size()); }
  int type_count(int dir_id) const {
    return static_cast<int>(dirs_[dir_id].size());
  }
  const Vec2& mean_offset(int dir_id, int type) const;
  const std::vector<Vec2>& mean_offsets(int dir_id) const {
    return dirs_[dir_id];
  }

  // Nearest mean offset to a displacement; smaller index wins ties.
  int nearest_type(int dir_id, const Vec2& displacement) const;

  bool consistent_with(const PartGraph& graph) const {
    return num_directed_edges() == graph.num_directed_edges();
  }

private:
  std::vector<std::vector<Vec2>> dirs_;
};

}  // namespace idpr
