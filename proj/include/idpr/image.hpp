#pragma once

#include "idpr/grid.hpp"

namespace idpr {

// Grayscale intensities, nominally in [0, 1].
using Image = Grid<double>;

// Pixel read with replicated edges: out-of-range coordinates clamp to the
// nearest border pixel.
double pixel_clamped(const Image& image, int x, int y);

// Bilinear interpolation at a real-valued location over the
// replicated-edge canvas.
double bilinear_sample(const Image& image, double x, double y);

}  // namespace idpr
