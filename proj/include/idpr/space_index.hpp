#pragma once

#include <vector>

#include "idpr/part_graph.hpp"
#include "idpr/relation_model.hpp"

namespace idpr {

// Classifier target: category 0 is background (empty tuple); category c in
// [1, K] is part c-1 together with one relation type per neighbor of that
// part, neighbors taken in ascending part order.
struct PatchLabel {
  int category = 0;
  std::vector<int> relation_types;
};

// Bijection between patch labels and flat classifier output indices.
// Index 0 is background; each part then owns a contiguous block of size
// prod_j T_ij over its neighbors, mixed-radix with the last neighbor
// varying fastest.
class SpaceIndex {
public:
  SpaceIndex() = default;
  SpaceIndex(const PartGraph& graph, const RelationModel& relations);

  int flat_size() const { return flat_size_; }
  int num_parts() const { return static_cast<int>(parts_.size()); }

  int encode(const PatchLabel& label) const;
  PatchLabel decode(int flat) const;

  int part_block_begin(int part) const { return parts_.at(part).block_begin; }
  int part_block_size(int part) const { return parts_.at(part).block_size; }
  // Slot of neighbor j in part i's tuple; throws if (i, j) is not an edge.
  int neighbor_slot(int part, int neighbor) const;
  int slot_radix(int part, int slot) const {
    return parts_.at(part).radix.at(slot);
  }
  int slot_stride(int part, int slot) const {
    return parts_.at(part).stride.at(slot);
  }
  const std::vector<int>& part_neighbors(int part) const {
    return parts_.at(part).neighbors;
  }

private:
  struct PartBlock {
    int block_begin = 0;
    int block_size = 1;
    std::vector<int> neighbors;  // ascending
    std::vector<int> radix;      // type count per slot
    std::vector<int> stride;     // product of later radices
  };

  std::vector<PartBlock> parts_;
  int flat_size_ = 1;
};

}  // namespace idpr
