#include "idpr/image.hpp"

#include <algorithm>
#include <cmath>

namespace idpr {

double pixel_clamped(const Image& image, int x, int y) {
  x = std::clamp(x, 0, image.width() - 1);
  y = std::clamp(y, 0, image.height() - 1);
  return image(x, y);
}

double bilinear_sample(const Image& image, double x, double y) {
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const double fx = x - x0;
  const double fy = y - y0;
  const double v00 = pixel_clamped(image, x0, y0);
  const double v10 = pixel_clamped(image, x0 + 1, y0);
  const double v01 = pixel_clamped(image, x0, y0 + 1);
  const double v11 = pixel_clamped(image, x0 + 1, y0 + 1);
  const double top = v00 * (1.0 - fx) + v10 * fx;
  const double bottom = v01 * (1.0 - fx) + v11 * fx;
  return top * (1.0 - fy) + bottom * fy;
}

}  // namespace idpr
