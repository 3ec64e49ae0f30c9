#include "idpr/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "idpr/error.hpp"

namespace idpr {
namespace {

struct Color {
  unsigned char r, g, b;
};

constexpr std::array<Color, 10> kPalette = {{{230, 60, 60},
                                             {60, 160, 230},
                                             {80, 200, 100},
                                             {240, 180, 40},
                                             {180, 90, 220},
                                             {60, 210, 200},
                                             {240, 120, 180},
                                             {150, 150, 60},
                                             {90, 110, 240},
                                             {230, 130, 60}}};

// 3x5 digit glyphs, one bit per pixel, rows top to bottom.
constexpr std::array<std::array<unsigned char, 5>, 10> kDigits = {{
    {0b111, 0b101, 0b101, 0b101, 0b111},  // 0
    {0b010, 0b110, 0b010, 0b010, 0b111},  // 1
    {0b111, 0b001, 0b111, 0b100, 0b111},  // 2
    {0b111, 0b001, 0b111, 0b001, 0b111},  // 3
    {0b101, 0b101, 0b111, 0b001, 0b001},  // 4
    {0b111, 0b100, 0b111, 0b001, 0b111},  // 5
    {0b111, 0b100, 0b111, 0b101, 0b111},  // 6
    {0b111, 0b001, 0b010, 0b010, 0b010},  // 7
    {0b111, 0b101, 0b111, 0b101, 0b111},  // 8
    {0b111, 0b101, 0b111, 0b001, 0b111},  // 9
}};

void put_pixel(RgbImage& img, int x, int y, Color c) {
  if (x < 0 || x >= img.width || y < 0 || y >= img.height) return;
  unsigned char* px = img.at(x, y);
  px[0] = c.r;
  px[1] = c.g;
  px[2] = c.b;
}

void draw_line(RgbImage& img, int x0, int y0, int x1, int y1, Color c) {
  const int dx = std::abs(x1 - x0);
  const int dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1;
  const int sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    put_pixel(img, x0, y0, c);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

void draw_disc(RgbImage& img, int cx, int cy, int radius, Color c) {
  for (int y = -radius; y <= radius; ++y) {
    for (int x = -radius; x <= radius; ++x) {
      if (x * x + y * y <= radius * radius) {
        put_pixel(img, cx + x, cy + y, c);
      }
    }
  }
}

void draw_number(RgbImage& img, int x, int y, int value, Color c) {
  const std::string text = std::to_string(value);
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto& glyph = kDigits[static_cast<std::size_t>(text[i] - '0')];
    const int gx = x + static_cast<int>(i) * 4;
    for (int row = 0; row < 5; ++row) {
      for (int col = 0; col < 3; ++col) {
        if (glyph[row] & (1 << (2 - col))) {
          put_pixel(img, gx + col, y + row, c);
        }
      }
    }
  }
}

RgbImage upscale(const Image& src, int scale) {
  RgbImage out(src.width() * scale, src.height() * scale);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      const unsigned char v = static_cast<unsigned char>(
          std::lround(std::clamp(src(x / scale, y / scale), 0.0, 1.0) * 255));
      unsigned char* px = out.at(x, y);
      px[0] = px[1] = px[2] = v;
    }
  }
  return out;
}

}  // namespace

RgbImage render_pose_overlay(const Image& background, const Pose& pose,
                             const PartGraph& graph,
                             const TypeAssignment* types, int scale) {
  if (scale < 1) throw ConfigError("overlay scale must be >= 1");
  if (pose.size() != graph.num_parts()) {
    throw ConfigError("pose does not match graph");
  }
  RgbImage img = upscale(background, scale);
  // Map a joint to the center of its (upscaled) pixel.
  auto px = [&](const Vec2& p) {
    return std::pair<int, int>{
        static_cast<int>(std::lround(p.x * scale + 0.5 * (scale - 1))),
        static_cast<int>(std::lround(p.y * scale + 0.5 * (scale - 1)))};
  };

  for (int e = 0; e < graph.num_edges(); ++e) {
    const auto [a, b] = graph.edges()[e];
    const Color c = kPalette[e % kPalette.size()];
    const auto [x0, y0] = px(pose.joints[a]);
    const auto [x1, y1] = px(pose.joints[b]);
    draw_line(img, x0, y0, x1, y1, c);
    if (types != nullptr) {
      const int dir = graph.directed_id(a, b);
      draw_number(img, (x0 + x1) / 2 + 2, (y0 + y1) / 2 + 2,
                  types->types.at(dir), Color{255, 255, 255});
    }
  }
  for (int i = 0; i < graph.num_parts(); ++i) {
    const auto [x, y] = px(pose.joints[i]);
    draw_disc(img, x, y, std::max(1, scale / 4),
              kPalette[i % kPalette.size()]);
  }
  return img;
}

}  // namespace idpr
