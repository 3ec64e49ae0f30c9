#pragma once

#include <utility>
#include <vector>

#include "idpr/dataset.hpp"
#include "idpr/part_graph.hpp"

namespace idpr {

struct AugmentStats {
  int produced = 0;
  int dropped = 0;  // copies discarded because a joint left the grid
};

// Rotates every positive through 360 degrees in rotation_step_deg
// increments (the 0-degree copy included), resampling the image bilinearly
// about its center and rotating the joints exactly; with flip, each
// rotated copy is also mirrored horizontally with the graph's left/right
// part indices swapped. Copies whose joints leave the grid are dropped and
// counted. Warns when the step does not divide 360.
std::vector<AnnotatedImage> augment(const std::vector<AnnotatedImage>& positives,
                                    double rotation_step_deg, bool flip,
                                    const PartGraph& graph,
                                    AugmentStats* stats = nullptr);

// Inserts one new part at the midpoint of every edge: edge (i, j) becomes
// (i, mid) and (mid, j) with mid = num_parts + edge_index. A K-part tree
// expands to 2K-1 parts; left/right pairs extend to midpoints of mirrored
// edges.
PartGraph add_midway_parts_graph(const PartGraph& base);
std::pair<Pose, PartGraph> add_midway_parts(const Pose& pose,
                                            const PartGraph& base);
Pose add_midway_parts_pose(const Pose& pose, const PartGraph& base);

}  // namespace idpr
