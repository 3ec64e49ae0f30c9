#pragma once

#include <utility>

#include "idpr/part_graph.hpp"
#include "idpr/relation_model.hpp"
#include "idpr/score_maps.hpp"
#include "idpr/weights.hpp"

namespace idpr {

// Floor-snap a real location to its map cell; throws BoundsError when the
// location falls outside the grid.
std::pair<int, int> snap_to_grid(const Vec2& loc, int width, int height);

// Total score of a fully specified configuration: weighted appearance per
// part, per-directed-edge deformation plus type evidence (or the constant
// per-type prior in no-idprs mode, or nothing in unary-only mode), plus the
// global bias. Appearance and type evidence are read from the maps at the
// snapped locations; deformation uses the real-valued displacement.
double full_score(const Pose& pose, const TypeAssignment& types,
                  const ScoreMapStack& maps, const Weights& weights,
                  const PartGraph& graph, const RelationModel& relations);

}  // namespace idpr
