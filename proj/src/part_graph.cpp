#include "idpr/part_graph.hpp"

#include <algorithm>
#include <set>

#include "idpr/error.hpp"

namespace idpr {

PartGraph::PartGraph(int num_parts, std::vector<std::pair<int, int>> edges,
                     int root, std::vector<std::string> part_names,
                     std::vector<std::pair<int, int>> left_right_pairs)
    : num_parts_(num_parts),
      edges_(std::move(edges)),
      root_(root),
      part_names_(std::move(part_names)),
      left_right_pairs_(std::move(left_right_pairs)) {
  if (part_names_.empty()) {
    part_names_.reserve(num_parts_);
    for (int i = 0; i < num_parts_; ++i)
      part_names_.push_back("part" + std::to_string(i));
  }

  if (num_parts_ < 1)
    throw GraphError(GraphError::Kind::kIndexOutOfRange,
                     "graph needs at least one part");
  if (root_ < 0 || root_ >= num_parts_)
    throw GraphError(GraphError::Kind::kIndexOutOfRange,
                     "root " + std::to_string(root_) + " outside [0, " +
                         std::to_string(num_parts_) + ")");
  if (static_cast<int>(part_names_.size()) != num_parts_)
    throw GraphError(GraphError::Kind::kIndexOutOfRange,
                     "part_names count does not match num_parts");

  // No explicit K-1 edge-count check: with self-loops and duplicates
  // rejected, a surplus edge always closes a cycle and a deficit always
  // leaves a part unreachable, so the BFS below names the precise failure.
  std::set<std::pair<int, int>> seen;
  for (const auto& [a, b] : edges_) {
    if (a < 0 || a >= num_parts_ || b < 0 || b >= num_parts_)
      throw GraphError(GraphError::Kind::kIndexOutOfRange,
                       "edge endpoint outside [0, " +
                           std::to_string(num_parts_) + ")");
    if (a == b)
      throw GraphError(GraphError::Kind::kSelfLoop,
                       "self-loop at part " + std::to_string(a));
    auto key = std::minmax(a, b);
    if (!seen.insert(key).second)
      throw GraphError(GraphError::Kind::kDuplicateEdge,
                       "duplicate edge {" + std::to_string(a) + "," +
                           std::to_string(b) + "}");
  }
  for (const auto& [l, r] : left_right_pairs_) {
    if (l < 0 || l >= num_parts_ || r < 0 || r >= num_parts_ || l == r)
      throw GraphError(GraphError::Kind::kIndexOutOfRange,
                       "invalid left/right pair");
  }

  neighbors_.assign(num_parts_, {});
  for (const auto& [a, b] : edges_) {
    neighbors_[a].push_back(b);
    neighbors_[b].push_back(a);
  }
  for (auto& n : neighbors_) std::sort(n.begin(), n.end());

  // BFS from the root: detects cycles/disconnection and yields the rooted
  // views.
  parent_.assign(num_parts_, -1);
  children_.assign(num_parts_, {});
  std::vector<bool> visited(num_parts_, false);
  topo_order_.clear();
  topo_order_.push_back(root_);
  visited[root_] = true;
  for (std::size_t head = 0; head < topo_order_.size(); ++head) {
    int i = topo_order_[head];
    for (int j : neighbors_[i]) {
      if (j == parent_[i]) continue;
      if (visited[j])
        throw GraphError(GraphError::Kind::kCycle,
                         "cycle through parts " + std::to_string(i) + " and " +
                             std::to_string(j));
      visited[j] = true;
      parent_[j] = i;
      children_[i].push_back(j);
      topo_order_.push_back(j);
    }
  }
  for (int i = 0; i < num_parts_; ++i) {
    if (!visited[i])
      throw GraphError(GraphError::Kind::kDisconnected,
                       "part " + std::to_string(i) +
                           " not reachable from root");
  }
}

int PartGraph::edge_index(int i, int j) const {
  for (int e = 0; e < num_edges(); ++e) {
    const auto& [a, b] = edges_[e];
    if ((a == i && b == j) || (a == j && b == i)) return e;
  }
  throw GraphError(GraphError::Kind::kIndexOutOfRange,
                   "no edge between parts " + std::to_string(i) + " and " +
                       std::to_string(j));
}

int PartGraph::directed_id(int from, int to) const {
  int e = edge_index(from, to);
  return edges_[e].first == from ? 2 * e : 2 * e + 1;
}

std::pair<int, int> PartGraph::directed_endpoints(int dir_id) const {
  const auto& [a, b] = edges_[dir_id / 2];
  return (dir_id % 2 == 0) ? std::make_pair(a, b) : std::make_pair(b, a);
}

int PartGraph::part_index(const std::string& name) const {
  for (int i = 0; i < num_parts_; ++i)
    if (part_names_[i] == name) return i;
  return -1;
}

void validate_graph(const PartGraph& graph) {
  // Rebuild from the public fields; the constructor performs every check.
  PartGraph(graph.num_parts(), graph.edges(), graph.root(), graph.part_names(),
            graph.left_right_pairs());
}

}  // namespace idpr
