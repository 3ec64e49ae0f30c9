#include "idpr/patch.hpp"

#include <cmath>
#include <numbers>

#include "idpr/error.hpp"

namespace idpr {

Image extract_patch(const Image& image, int cx, int cy, int side) {
  if (side < 1) {
    throw ConfigError("patch side must be >= 1");
  }
  if (image.empty()) {
    throw DataError("cannot extract a patch from an empty image");
  }
  Image patch(side, side);
  const int ox = cx - (side - 1) / 2;
  const int oy = cy - (side - 1) / 2;
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      patch(x, y) = pixel_clamped(image, ox + x, oy + y);
    }
  }
  return patch;
}

namespace {

std::vector<double> gradient_histogram(const Image& patch, int cells,
                                       int bins) {
  const int side = patch.width();
  std::vector<double> features(
      static_cast<std::size_t>(cells) * cells * bins, 0.0);
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      const double gx =
          pixel_clamped(patch, x + 1, y) - pixel_clamped(patch, x - 1, y);
      const double gy =
          pixel_clamped(patch, x, y + 1) - pixel_clamped(patch, x, y - 1);
      const double mag = std::sqrt(gx * gx + gy * gy);
      if (mag == 0.0) continue;
      double angle = std::atan2(gy, gx);  // unsigned orientation in [0, pi)
      if (angle < 0.0) angle += std::numbers::pi;
      if (angle >= std::numbers::pi) angle = 0.0;
      int bin = static_cast<int>(angle / std::numbers::pi * bins);
      if (bin >= bins) bin = bins - 1;
      const int cell_x = x * cells / side;
      const int cell_y = y * cells / side;
      features[(static_cast<std::size_t>(cell_y) * cells + cell_x) * bins +
               bin] += mag;
    }
  }
  // Per-cell L2 normalization so texture contrast does not dominate.
  for (int c = 0; c < cells * cells; ++c) {
    double norm2 = 0.0;
    for (int b = 0; b < bins; ++b) {
      const double v = features[static_cast<std::size_t>(c) * bins + b];
      norm2 += v * v;
    }
    const double norm = std::sqrt(norm2) + 1e-9;
    for (int b = 0; b < bins; ++b) {
      features[static_cast<std::size_t>(c) * bins + b] /= norm;
    }
  }
  return features;
}

}  // namespace

int feature_dim(const PatchFeatureConfig& config, int side) {
  switch (config.kind) {
    case PatchFeatureConfig::Kind::kRawPixels:
      return side * side;
    case PatchFeatureConfig::Kind::kGradientHistogram:
      return config.hist_cells * config.hist_cells * config.hist_bins;
  }
  return 0;
}

std::vector<double> featurize_patch(const Image& patch,
                                    const PatchFeatureConfig& config) {
  if (patch.width() != patch.height() || patch.empty()) {
    throw ConfigError("patches must be square and non-empty");
  }
  switch (config.kind) {
    case PatchFeatureConfig::Kind::kRawPixels: {
      std::vector<double> features;
      features.reserve(patch.size());
      for (double v : patch.cells()) features.push_back(v - 0.5);
      return features;
    }
    case PatchFeatureConfig::Kind::kGradientHistogram:
      return gradient_histogram(patch, config.hist_cells, config.hist_bins);
  }
  throw ConfigError("unknown feature kind");
}

}  // namespace idpr
