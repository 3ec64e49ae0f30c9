#include "idpr/weights.hpp"

#include <cmath>

#include "idpr/error.hpp"

namespace idpr {

const char* to_string(ModelMode mode) {
  switch (mode) {
    case ModelMode::kFull:
      return "full";
    case ModelMode::kUnaryOnly:
      return "unary-only";
    case ModelMode::kNoIdprs:
      return "no-idprs";
  }
  return "?";
}

ModelMode parse_mode(std::string_view name) {
  if (name == "full") return ModelMode::kFull;
  if (name == "unary-only") return ModelMode::kUnaryOnly;
  if (name == "no-idprs") return ModelMode::kNoIdprs;
  throw ConfigError("unknown model mode '" + std::string(name) +
                    "' (expected full, unary-only, or no-idprs)");
}

std::array<double, 4> deformation_features(const Vec2& d) {
  return {d.x, d.x * d.x, d.y, d.y * d.y};
}

namespace {

bool all_finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

void check_typed_sizes(const char* what, std::size_t got, std::size_t want) {
  if (got != want) {
    throw ConfigError(std::string(what) + ": have " + std::to_string(got) +
                      " entries, expected " + std::to_string(want));
  }
}

}  // namespace

void validate_weights(const Weights& w, const PartGraph& graph,
                      const RelationModel& relations) {
  const std::size_t num_parts = static_cast<std::size_t>(graph.num_parts());
  const std::size_t num_dirs =
      static_cast<std::size_t>(graph.num_directed_edges());
  if (!relations.consistent_with(graph)) {
    throw ConfigError("relation model does not match graph");
  }
  check_typed_sizes("unary weights", w.unary.size(), num_parts);
  if (!all_finite(w.unary) || !std::isfinite(w.bias)) {
    throw ConfigError("weights must be finite");
  }

  const bool wants_idpr = w.mode == ModelMode::kFull;
  const bool wants_deform = w.mode != ModelMode::kUnaryOnly;
  const bool wants_prior = w.mode == ModelMode::kNoIdprs;

  check_typed_sizes("type-score weights", w.idpr.size(),
                    wants_idpr ? num_dirs : 0);
  if (!all_finite(w.idpr)) {
    throw ConfigError("weights must be finite");
  }
  check_typed_sizes("deformation weights", w.deform.size(),
                    wants_deform ? num_dirs : 0);
  check_typed_sizes("type priors", w.prior_bias.size(),
                    wants_prior ? num_dirs : 0);

  for (std::size_t d = 0; d < w.deform.size(); ++d) {
    const std::size_t types =
        static_cast<std::size_t>(relations.type_count(static_cast<int>(d)));
    check_typed_sizes("deformation weights per type", w.deform[d].size(),
                      types);
    for (const auto& coeff : w.deform[d]) {
      for (double c : coeff) {
        if (!std::isfinite(c)) {
          throw ConfigError("weights must be finite");
        }
      }
      if (coeff[1] > -kQuadEps || coeff[3] > -kQuadEps) {
        throw ConcavityError(
            "quadratic deformation coefficients must be <= -" +
            std::to_string(kQuadEps) + " on directed edge " +
            std::to_string(d));
      }
    }
  }
  for (std::size_t d = 0; d < w.prior_bias.size(); ++d) {
    const std::size_t types =
        static_cast<std::size_t>(relations.type_count(static_cast<int>(d)));
    check_typed_sizes("type priors per type", w.prior_bias[d].size(), types);
    if (!all_finite(w.prior_bias[d])) {
      throw ConfigError("weights must be finite");
    }
  }
}

Weights default_weights(ModelMode mode, const PartGraph& graph,
                        const RelationModel& relations) {
  Weights w;
  w.mode = mode;
  w.unary.assign(graph.num_parts(), 1.0);
  w.bias = 0.0;
  const int num_dirs = graph.num_directed_edges();
  if (mode == ModelMode::kFull) {
    w.idpr.assign(num_dirs, 1.0);
  }
  if (mode != ModelMode::kUnaryOnly) {
    w.deform.resize(num_dirs);
    for (int d = 0; d < num_dirs; ++d) {
      w.deform[d].assign(relations.type_count(d),
                         std::array<double, 4>{0.0, -1.0, 0.0, -1.0});
    }
  }
  if (mode == ModelMode::kNoIdprs) {
    w.prior_bias.resize(num_dirs);
    for (int d = 0; d < num_dirs; ++d) {
      w.prior_bias[d].assign(relations.type_count(d), 0.0);
    }
  }
  validate_weights(w, graph, relations);
  return w;
}

}  // namespace idpr
