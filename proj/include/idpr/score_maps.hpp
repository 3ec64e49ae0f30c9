#pragma once

#include <filesystem>
#include <utility>
#include <vector>

#include "idpr/grid.hpp"

namespace idpr {

// Log-probabilities below this are clamped so the maps stay finite and DP
// arithmetic never sees -inf.
inline constexpr double kLogFloor = -30.0;

// Dense per-location evidence: one appearance plane per part holding
// log p(part | patch), and one plane per (directed edge, type) holding
// log p(type | part, patch). Planes are float so files round-trip
// bit-exactly.
class ScoreMapStack {
public:
  ScoreMapStack() = default;

  // dir_parts[d] = (from, to) part indices of directed edge d;
  // type_counts[d] = number of relation types of that direction.
  ScoreMapStack(int width, int height, int stride, int num_parts,
                std::vector<std::pair<int, int>> dir_parts,
                std::vector<int> type_counts);

  int width() const { return width_; }
  int height() const { return height_; }
  int stride() const { return stride_; }
  int num_parts() const { return num_parts_; }
  int num_directed_edges() const { return static_cast<int>(dir_parts_.size()); }
  int type_count(int dir_id) const { return type_counts_.at(dir_id); }
  std::pair<int, int> dir_parts(int dir_id) const {
    return dir_parts_.at(dir_id);
  }

  Grid<float>& appearance(int part) { return planes_[appearance_channel(part)]; }
  const Grid<float>& appearance(int part) const {
    return planes_[appearance_channel(part)];
  }
  Grid<float>& idpr(int dir_id, int type) {
    return planes_[idpr_channel(dir_id, type)];
  }
  const Grid<float>& idpr(int dir_id, int type) const {
    return planes_[idpr_channel(dir_id, type)];
  }

  int num_channels() const { return static_cast<int>(planes_.size()); }

  bool operator==(const ScoreMapStack& other) const;

private:
  int appearance_channel(int part) const;
  int idpr_channel(int dir_id, int type) const;

  int width_ = 0;
  int height_ = 0;
  int stride_ = 1;
  int num_parts_ = 0;
  std::vector<std::pair<int, int>> dir_parts_;
  std::vector<int> type_counts_;
  std::vector<int> idpr_base_;  // channel index of type 0 per directed edge
  std::vector<Grid<float>> planes_;
};

// Binary container: magic "IDPR", version, dims, channel directory, f32
// planes. load(save(x)) is bit-identical to x.
void save_score_maps(const ScoreMapStack& stack,
                     const std::filesystem::path& path);
ScoreMapStack load_score_maps(const std::filesystem::path& path);

class PartGraph;
class RelationModel;

// Zero-filled stack shaped after the graph's directed edges and the
// relation model's type counts.
ScoreMapStack make_score_map_stack(const PartGraph& graph,
                                   const RelationModel& relations, int width,
                                   int height, int stride);

}  // namespace idpr
