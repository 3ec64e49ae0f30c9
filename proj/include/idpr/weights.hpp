#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "idpr/part_graph.hpp"
#include "idpr/relation_model.hpp"
#include "idpr/vec2.hpp"

namespace idpr {

// Quadratic deformation coefficients must stay at or below -kQuadEps so
// every pairwise term is strictly concave and the distance transform is
// well posed.
inline constexpr double kQuadEps = 1e-4;

enum class ModelMode {
  kFull,       // appearance + typed deformation + image-dependent type scores
  kUnaryOnly,  // appearance only, parts located independently
  kNoIdprs,    // typed deformation with a constant per-type prior instead of
               // image-dependent type scores
};

const char* to_string(ModelMode mode);
ModelMode parse_mode(std::string_view name);

// [dx, dx^2, dy, dy^2] of a displacement; the deformation score is the dot
// product of this with the per-(direction, type) coefficient block.
std::array<double, 4> deformation_features(const Vec2& d);

struct Weights {
  ModelMode mode = ModelMode::kFull;
  std::vector<double> unary;  // per part, scales the appearance channel
  // Per directed edge, scales the type-score channel. Full mode only.
  std::vector<double> idpr;
  // Per directed edge, per type: coefficients matching deformation_features.
  std::vector<std::vector<std::array<double, 4>>> deform;
  // Per directed edge, per type: constant prior replacing the type-score
  // channel. NoIdprs mode only.
  std::vector<std::vector<double>> prior_bias;
  double bias = 0.0;
};

// Checks sizes against the graph and relation model for the declared mode,
// finiteness, and concavity of the quadratic coefficients.
void validate_weights(const Weights& w, const PartGraph& graph,
                      const RelationModel& relations);

// Unit unary/idpr weights, unit-concave deformation, zero priors and bias.
Weights default_weights(ModelMode mode, const PartGraph& graph,
                        const RelationModel& relations);

}  // namespace idpr
