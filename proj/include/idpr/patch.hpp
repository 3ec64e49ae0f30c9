#pragma once

#include <vector>

#include "idpr/image.hpp"

namespace idpr {

// side x side window around (cx, cy); pixels past the image border are
// filled by edge replication. The window origin is (cx - (side-1)/2,
// cy - (side-1)/2), which centers odd sides exactly and puts even-side
// centers one cell up-left of true center.
Image extract_patch(const Image& image, int cx, int cy, int side);

struct PatchFeatureConfig {
  enum class Kind {
    kRawPixels,          // centered intensities, one value per pixel
    kGradientHistogram,  // per-cell orientation histograms of gradients
  };
  Kind kind = Kind::kRawPixels;
  int hist_cells = 3;  // cells per patch axis
  int hist_bins = 8;   // orientation bins over [0, pi)
};

int feature_dim(const PatchFeatureConfig& config, int side);
std::vector<double> featurize_patch(const Image& patch,
                                    const PatchFeatureConfig& config);

}  // namespace idpr
