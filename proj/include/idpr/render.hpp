#pragma once

#include "idpr/image_io.hpp"
#include "idpr/part_graph.hpp"

namespace idpr {

// Draws the pose over the (upscaled) grayscale background: limbs as lines,
// joints as filled discs, and — when a type assignment is given — the
// forward type index of each limb as a small digit label at its midpoint.
// scale >= 1 is the integer upscaling factor applied to the background.
RgbImage render_pose_overlay(const Image& background, const Pose& pose,
                             const PartGraph& graph,
                             const TypeAssignment* types = nullptr,
                             int scale = 8);

}  // namespace idpr
