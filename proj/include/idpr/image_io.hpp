#pragma once

#include <string>
#include <vector>

#include "idpr/image.hpp"

namespace idpr {

// 8-bit interleaved RGB, row-major.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<unsigned char> pixels;

  RgbImage() = default;
  RgbImage(int w, int h)
      : width(w), height(h),
        pixels(static_cast<std::size_t>(w) * h * 3, 0) {}

  unsigned char* at(int x, int y) {
    return &pixels[3 * (static_cast<std::size_t>(y) * width + x)];
  }
  const unsigned char* at(int x, int y) const {
    return &pixels[3 * (static_cast<std::size_t>(y) * width + x)];
  }
};

// Grayscale images hold values in [0, 1]; files store 8-bit quantized
// pixels. Color inputs are reduced with the usual luma weights.
Image load_image(const std::string& path);  // dispatches on file magic
void save_image(const Image& image, const std::string& path);  // by extension

Image load_pgm(const std::string& path);  // P5 or P2, maxval <= 255
void save_pgm(const Image& image, const std::string& path);

Image load_png_gray(const std::string& path);
void save_png(const RgbImage& image, const std::string& path);
void save_png_gray(const Image& image, const std::string& path);

RgbImage to_rgb(const Image& image);

}  // namespace idpr
