#pragma once

#include <span>

#include "idpr/classifier.hpp"
#include "idpr/image.hpp"
#include "idpr/part_graph.hpp"
#include "idpr/score_maps.hpp"
#include "idpr/space_index.hpp"

namespace idpr {

// log p(category = part) under dist, clamped at kLogFloor.
double marginal_appearance(std::span<const double> dist,
                           const SpaceIndex& space, int part);

// log p(relation type to `neighbor` = type | category = part), clamped at
// kLogFloor; returns the floor outright when the conditioning mass is zero.
double marginal_idpr(std::span<const double> dist, const SpaceIndex& space,
                     int part, int neighbor, int type);

// Classifier evaluated on the patch around every lattice location (every
// stride-th pixel per axis) and marginalized into all appearance and
// type-score planes; off-lattice pixels copy their nearest lattice point.
ScoreMapStack compute_score_maps(const Image& image,
                                 const PatchClassifier& classifier,
                                 const PartGraph& graph,
                                 const SpaceIndex& space, int stride);

namespace serial {
// Reference implementation with plain loops.
ScoreMapStack compute_score_maps(const Image& image,
                                 const PatchClassifier& classifier,
                                 const PartGraph& graph,
                                 const SpaceIndex& space, int stride);
}  // namespace serial

}  // namespace idpr
