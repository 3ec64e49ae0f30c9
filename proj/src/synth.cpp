#include "idpr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "idpr/error.hpp"
#include "idpr/rng.hpp"

namespace idpr {
namespace {

constexpr double kBackground = 0.15;
constexpr double kLimbBase = 0.75;
constexpr double kTexturePeriod = 3.0;  // pixels per intensity ripple

double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b,
                        double* along) {
  const Vec2 ab = b - a;
  const double len2 = ab.norm2();
  const double t =
      len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  *along = t * std::sqrt(len2);
  return (a + ab * t - p).norm();
}

void draw_solid_disc(Image& img, const Vec2& center, double radius,
                     double value) {
  const int x0 = std::max(0, static_cast<int>(std::floor(center.x - radius)));
  const int x1 = std::min(img.width() - 1,
                          static_cast<int>(std::ceil(center.x + radius)));
  const int y0 = std::max(0, static_cast<int>(std::floor(center.y - radius)));
  const int y1 = std::min(img.height() - 1,
                          static_cast<int>(std::ceil(center.y + radius)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      if ((Vec2(x, y) - center).norm2() <= radius * radius) {
        img(x, y) = value;
      }
    }
  }
}

void draw_limb(Image& img, const Vec2& a, const Vec2& b, double half_width,
               double texture, double phase) {
  const int x0 = std::max(
      0, static_cast<int>(std::floor(std::min(a.x, b.x) - half_width)));
  const int x1 = std::min(
      img.width() - 1,
      static_cast<int>(std::ceil(std::max(a.x, b.x) + half_width)));
  const int y0 = std::max(
      0, static_cast<int>(std::floor(std::min(a.y, b.y) - half_width)));
  const int y1 = std::min(
      img.height() - 1,
      static_cast<int>(std::ceil(std::max(a.y, b.y) + half_width)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      double along = 0.0;
      if (segment_distance(Vec2(x, y), a, b, &along) <= half_width) {
        const double ripple =
            texture *
            std::sin(2.0 * std::numbers::pi * along / kTexturePeriod + phase);
        img(x, y) = std::max(
            img(x, y), std::clamp(kLimbBase + ripple, 0.0, 1.0));
      }
    }
  }
}

double joint_intensity(int part, int num_parts) {
  if (num_parts <= 1) return 1.0;
  return 0.55 + 0.45 * static_cast<double>(num_parts - 1 - part) /
                    (num_parts - 1);
}

Image render_background(int w, int h, double noise, int distractors,
                        Rng& rng) {
  Image img(w, h, kBackground);
  if (noise > 0.0) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        img(x, y) = std::clamp(
            kBackground + noise * (2.0 * rng.next_double() - 1.0), 0.0, 1.0);
      }
    }
  }
  for (int d = 0; d < distractors; ++d) {
    const Vec2 center{rng.uniform(0.0, w - 1.0), rng.uniform(0.0, h - 1.0)};
    const double radius = rng.uniform(1.0, 2.5);
    const double value = rng.uniform(0.4, 0.9);
    draw_solid_disc(img, center, radius, value);
  }
  return img;
}

std::string zero_padded(const char* prefix, int n) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%04d", prefix, n);
  return buf;
}

struct FigureConfig {
  std::vector<double> lengths;
  std::vector<std::vector<double>> modes;
};

FigureConfig resolve_figure(const SynthConfig& c) {
  FigureConfig fig;
  const int num_limbs = c.num_parts - 1;
  if (c.limb_lengths.empty()) {
    fig.lengths.assign(num_limbs, std::min(c.width, c.height) / 4.0);
  } else if (static_cast<int>(c.limb_lengths.size()) == num_limbs) {
    fig.lengths = c.limb_lengths;
  } else {
    throw ConfigError("limb length count must equal part count minus one");
  }
  if (c.angle_modes_deg.empty()) {
    fig.modes.assign(num_limbs, {0.0, 120.0, 240.0});
  } else if (static_cast<int>(c.angle_modes_deg.size()) == num_limbs) {
    fig.modes = c.angle_modes_deg;
  } else {
    throw ConfigError("angle mode list count must equal part count minus one");
  }
  for (double len : fig.lengths) {
    if (len <= 0.0) throw ConfigError("limb lengths must be positive");
  }
  for (const auto& m : fig.modes) {
    if (m.empty()) throw ConfigError("every limb needs at least one angle mode");
  }
  return fig;
}

}  // namespace

PartGraph synth_graph(int num_parts) {
  std::vector<std::pair<int, int>> edges;
  std::vector<std::string> names;
  for (int i = 0; i < num_parts; ++i) names.push_back("part" + std::to_string(i));
  for (int i = 0; i + 1 < num_parts; ++i) edges.emplace_back(i, i + 1);
  return PartGraph(num_parts, std::move(edges), 0, std::move(names));
}

std::pair<std::vector<AnnotatedImage>, std::vector<AnnotatedImage>>
synth_stickfigures(const SynthConfig& config) {
  if (config.num_positives < 0 || config.num_negatives < 0 ||
      config.width < 4 || config.height < 4 || config.num_parts < 2) {
    throw ConfigError("synthetic config out of range");
  }
  if (config.limb_width <= 0.0 || config.noise_level < 0.0 ||
      config.angle_jitter_deg < 0.0 || config.num_distractors < 0) {
    throw ConfigError("synthetic rendering parameters out of range");
  }
  const FigureConfig fig = resolve_figure(config);
  const int num_limbs = config.num_parts - 1;
  const double margin = 0.5;

  std::vector<AnnotatedImage> positives;
  for (int n = 0; n < config.num_positives; ++n) {
    AnnotatedImage inst;
    inst.id = zero_padded("pos_", n);
    Rng rng(derive_seed(config.seed, inst.id));

    std::vector<Vec2> rel(config.num_parts);
    Vec2 lo, hi;
    bool placed = false;
    Vec2 root;
    for (int attempt = 0; attempt < 50 && !placed; ++attempt) {
      rel[0] = Vec2{0.0, 0.0};
      for (int e = 0; e < num_limbs; ++e) {
        const auto& modes = fig.modes[e];
        double deg = modes[rng.next_below(modes.size())];
        deg += config.angle_jitter_deg * (2.0 * rng.next_double() - 1.0);
        const double rad = deg * std::numbers::pi / 180.0;
        rel[e + 1] =
            rel[e] + Vec2{fig.lengths[e] * std::cos(rad),
                          fig.lengths[e] * std::sin(rad)};
      }
      lo = hi = rel[0];
      for (const Vec2& p : rel) {
        lo = Vec2{std::min(lo.x, p.x), std::min(lo.y, p.y)};
        hi = Vec2{std::max(hi.x, p.x), std::max(hi.y, p.y)};
      }
      const double x_min = margin - lo.x;
      const double x_max = (config.width - 1 - margin) - hi.x;
      const double y_min = margin - lo.y;
      const double y_max = (config.height - 1 - margin) - hi.y;
      if (x_min > x_max || y_min > y_max) continue;
      root = Vec2{rng.uniform(x_min, std::nextafter(x_max, 1e300)),
                  rng.uniform(y_min, std::nextafter(y_max, 1e300))};
      placed = true;
    }
    if (!placed) {
      char buf[128];
      std::snprintf(buf, sizeof(buf),
                    "figure spans %.1f x %.1f cells but the grid is %d x %d",
                    hi.x - lo.x, hi.y - lo.y, config.width, config.height);
      throw DataError(std::string("synthetic figure cannot fit: ") + buf);
    }

    Pose pose;
    for (const Vec2& p : rel) pose.joints.push_back(root + p);

    inst.image = render_background(config.width, config.height,
                                   config.noise_level, config.num_distractors,
                                   rng);
    for (int e = 0; e < num_limbs; ++e) {
      const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
      draw_limb(inst.image, pose.joints[e], pose.joints[e + 1],
                0.5 * config.limb_width, config.limb_texture, phase);
    }
    for (int i = 0; i < config.num_parts; ++i) {
      draw_solid_disc(inst.image, pose.joints[i], config.joint_disc_radius,
                      joint_intensity(i, config.num_parts));
    }

    const Vec2& t0 = pose.joints[0];
    const Vec2& t1 = pose.joints[1];
    inst.torso_box = {{std::clamp(std::min(t0.x, t1.x) - 1.0, 0.0,
                                  config.width - 1.0),
                       std::clamp(std::min(t0.y, t1.y) - 1.0, 0.0,
                                  config.height - 1.0),
                       std::clamp(std::max(t0.x, t1.x) + 1.0, 0.0,
                                  config.width - 1.0),
                       std::clamp(std::max(t0.y, t1.y) + 1.0, 0.0,
                                  config.height - 1.0)}};
    inst.pose = std::move(pose);
    positives.push_back(std::move(inst));
  }

  std::vector<AnnotatedImage> negatives;
  for (int n = 0; n < config.num_negatives; ++n) {
    AnnotatedImage inst;
    inst.id = zero_padded("neg_", n);
    Rng rng(derive_seed(config.seed, inst.id));
    inst.image = render_background(config.width, config.height,
                                   config.noise_level, config.num_distractors,
                                   rng);
    negatives.push_back(std::move(inst));
  }
  return {std::move(positives), std::move(negatives)};
}

}  // namespace idpr
