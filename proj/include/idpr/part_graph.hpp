#pragma once

#include <string>
#include <utility>
#include <vector>

#include "idpr/vec2.hpp"

namespace idpr {

// Tree of K parts. Immutable after construction; the constructor validates
// every invariant and precomputes the rooted views (parent/children/order).
class PartGraph {
public:
  PartGraph() = default;
  PartGraph(int num_parts, std::vector<std::pair<int, int>> edges, int root,
            std::vector<std::string> part_names = {},
            std::vector<std::pair<int, int>> left_right_pairs = {});

  int num_parts() const { return num_parts_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int num_directed_edges() const { return 2 * num_edges(); }
  int root() const { return root_; }

  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<std::string>& part_names() const { return part_names_; }
  const std::vector<std::pair<int, int>>& left_right_pairs() const {
    return left_right_pairs_;
  }

  // Neighbors of a part in ascending index order. This order also fixes the
  // slot order of relation-type tuples in the label space.
  const std::vector<int>& neighbors(int part) const {
    return neighbors_[part];
  }
  const std::vector<int>& children(int part) const { return children_[part]; }
  int parent(int part) const { return parent_[part]; }

  // Parts ordered root-first so that parents precede children.
  const std::vector<int>& topo_order() const { return topo_order_; }

  // Index of the undirected edge {i, j}; throws if absent.
  int edge_index(int i, int j) const;

  // Directed edge id for i -> j: edge e stored as (a, b) owns ids 2e (a->b)
  // and 2e+1 (b->a).
  int directed_id(int from, int to) const;
  std::pair<int, int> directed_endpoints(int dir_id) const;

  int part_index(const std::string& name) const;  // -1 when absent

private:
  int num_parts_ = 0;
  std::vector<std::pair<int, int>> edges_;
  int root_ = 0;
  std::vector<std::string> part_names_;
  std::vector<std::pair<int, int>> left_right_pairs_;

  std::vector<std::vector<int>> neighbors_;
  std::vector<std::vector<int>> children_;
  std::vector<int> parent_;
  std::vector<int> topo_order_;
};

// Part locations in pixels, one per part of the associated graph.
struct Pose {
  std::vector<Vec2> joints;

  int size() const { return static_cast<int>(joints.size()); }
  bool finite() const {
    for (const Vec2& p : joints)
      if (!p.finite()) return false;
    return true;
  }
};

// One relation-type index per directed edge, indexed by directed id.
struct TypeAssignment {
  std::vector<int> types;
};

// Re-checks every PartGraph invariant on an already-built graph; throws
// GraphError. Runs at every model load.
void validate_graph(const PartGraph& graph);

}  // namespace idpr
