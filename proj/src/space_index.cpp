#include "idpr/space_index.hpp"

#include <cstdint>
#include <string>

#include "idpr/error.hpp"

namespace idpr {

SpaceIndex::SpaceIndex(const PartGraph& graph, const RelationModel& relations) {
  if (!relations.consistent_with(graph)) {
    throw ConfigError("relation model does not match graph");
  }
  parts_.resize(graph.num_parts());
  std::int64_t next = 1;  // 0 is background
  for (int i = 0; i < graph.num_parts(); ++i) {
    PartBlock& block = parts_[i];
    block.block_begin = static_cast<int>(next);
    block.neighbors = graph.neighbors(i);
    const int slots = static_cast<int>(block.neighbors.size());
    block.radix.resize(slots);
    block.stride.assign(slots, 1);
    std::int64_t size = 1;
    for (int s = 0; s < slots; ++s) {
      block.radix[s] = relations.type_count(graph.directed_id(i, block.neighbors[s]));
      size *= block.radix[s];
    }
    for (int s = slots - 2; s >= 0; --s) {
      block.stride[s] = block.stride[s + 1] * block.radix[s + 1];
    }
    block.block_size = static_cast<int>(size);
    next += size;
    if (next > INT32_MAX) {
      throw ConfigError("label space too large to index");
    }
  }
  flat_size_ = static_cast<int>(next);
}

int SpaceIndex::encode(const PatchLabel& label) const {
  if (label.category == 0) {
    if (!label.relation_types.empty()) {
      throw ConfigError("background label carries no relation types");
    }
    return 0;
  }
  const int part = label.category - 1;
  if (part < 0 || part >= num_parts()) {
    throw ConfigError("label category " + std::to_string(label.category) +
                      " out of range");
  }
  const PartBlock& block = parts_[part];
  if (label.relation_types.size() != block.neighbors.size()) {
    throw ConfigError("label tuple has " +
                      std::to_string(label.relation_types.size()) +
                      " types, part has " +
                      std::to_string(block.neighbors.size()) + " neighbors");
  }
  int flat = block.block_begin;
  for (std::size_t s = 0; s < block.radix.size(); ++s) {
    const int t = label.relation_types[s];
    if (t < 0 || t >= block.radix[s]) {
      throw ConfigError("relation type " + std::to_string(t) +
                        " out of range in label tuple");
    }
    flat += t * block.stride[s];
  }
  return flat;
}

PatchLabel SpaceIndex::decode(int flat) const {
  if (flat < 0 || flat >= flat_size_) {
    throw BoundsError("flat label index " + std::to_string(flat) +
                      " out of range");
  }
  PatchLabel label;
  if (flat == 0) {
    return label;
  }
  int part = num_parts() - 1;
  while (parts_[part].block_begin > flat) --part;
  label.category = part + 1;
  int rem = flat - parts_[part].block_begin;
  const PartBlock& block = parts_[part];
  label.relation_types.resize(block.radix.size());
  for (std::size_t s = 0; s < block.radix.size(); ++s) {
    label.relation_types[s] = rem / block.stride[s];
    rem %= block.stride[s];
  }
  return label;
}

int SpaceIndex::neighbor_slot(int part, int neighbor) const {
  const PartBlock& block = parts_.at(part);
  for (std::size_t s = 0; s < block.neighbors.size(); ++s) {
    if (block.neighbors[s] == neighbor) return static_cast<int>(s);
  }
  throw ConfigError("parts " + std::to_string(part) + " and " +
                    std::to_string(neighbor) + " are not neighbors");
}

}  // namespace idpr
