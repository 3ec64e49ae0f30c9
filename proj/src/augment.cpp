#include "idpr/augment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <numbers>

#include "idpr/error.hpp"

namespace idpr {
namespace {

Vec2 rotate_about(const Vec2& p, const Vec2& center, double cos_t,
                  double sin_t) {
  const Vec2 d = p - center;
  return Vec2{center.x + cos_t * d.x - sin_t * d.y,
              center.y + sin_t * d.x + cos_t * d.y};
}

bool on_grid(const Vec2& p, int w, int h) {
  return p.x >= 0.0 && p.x < w && p.y >= 0.0 && p.y < h;
}

std::string angle_label(double deg) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", deg);
  return buf;
}

Image rotate_image(const Image& src, double cos_t, double sin_t,
                   const Vec2& center) {
  Image out(src.width(), src.height());
  for (int y = 0; y < src.height(); ++y) {
    for (int x = 0; x < src.width(); ++x) {
      // Inverse map: rotate the destination pixel back by -theta.
      const Vec2 s = rotate_about(Vec2(x, y), center, cos_t, -sin_t);
      out(x, y) = bilinear_sample(src, s.x, s.y);
    }
  }
  return out;
}

std::array<double, 4> rotate_box(const std::array<double, 4>& box,
                                 const Vec2& center, double cos_t,
                                 double sin_t, int w, int h) {
  const Vec2 corners[4] = {{box[0], box[1]},
                           {box[2], box[1]},
                           {box[0], box[3]},
                           {box[2], box[3]}};
  double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
  for (const Vec2& corner : corners) {
    const Vec2 r = rotate_about(corner, center, cos_t, sin_t);
    x0 = std::min(x0, r.x);
    y0 = std::min(y0, r.y);
    x1 = std::max(x1, r.x);
    y1 = std::max(y1, r.y);
  }
  return {{std::clamp(x0, 0.0, w - 1.0), std::clamp(y0, 0.0, h - 1.0),
           std::clamp(x1, 0.0, w - 1.0), std::clamp(y1, 0.0, h - 1.0)}};
}

// Mirrors an instance horizontally in place, swapping left/right parts.
bool flip_instance(AnnotatedImage& inst, const PartGraph& graph) {
  const int w = inst.image.width();
  Image mirrored(w, inst.image.height());
  for (int y = 0; y < inst.image.height(); ++y) {
    for (int x = 0; x < w; ++x) mirrored(x, y) = inst.image(w - 1 - x, y);
  }
  inst.image = std::move(mirrored);

  std::vector<int> swap_to(graph.num_parts());
  for (int i = 0; i < graph.num_parts(); ++i) swap_to[i] = i;
  for (const auto& [l, r] : graph.left_right_pairs()) {
    swap_to[l] = r;
    swap_to[r] = l;
  }
  const Pose& src = *inst.pose;
  Pose flipped;
  flipped.joints.resize(src.size());
  for (int i = 0; i < src.size(); ++i) {
    const Vec2& p = src.joints[swap_to[i]];
    flipped.joints[i] = Vec2{(w - 1.0) - p.x, p.y};
    if (!on_grid(flipped.joints[i], w, inst.image.height())) return false;
  }
  inst.pose = std::move(flipped);
  if (inst.torso_box) {
    const auto& b = *inst.torso_box;
    inst.torso_box = {{(w - 1.0) - b[2], b[1], (w - 1.0) - b[0], b[3]}};
  }
  inst.id += "_f";
  return true;
}

}  // namespace

std::vector<AnnotatedImage> augment(const std::vector<AnnotatedImage>& positives,
                                    double rotation_step_deg, bool flip,
                                    const PartGraph& graph,
                                    AugmentStats* stats) {
  if (rotation_step_deg <= 0.0 || rotation_step_deg > 360.0) {
    throw ConfigError("rotation step must be in (0, 360]");
  }
  const int num_rot =
      static_cast<int>(std::floor(360.0 / rotation_step_deg + 1e-9));
  if (std::abs(num_rot * rotation_step_deg - 360.0) > 1e-6) {
    std::cerr << "warning: rotation step " << rotation_step_deg
              << " does not divide 360; using " << num_rot << " rotations\n";
  }

  std::vector<std::vector<AnnotatedImage>> slots(positives.size());
  std::vector<int> dropped_per(positives.size(), 0);

#pragma omp parallel for schedule(dynamic)
  for (std::size_t n = 0; n < positives.size(); ++n) {
    const AnnotatedImage& base = positives[n];
    if (!base.pose) {
      continue;  // negatives pass through augmentation untouched upstream
    }
    const int w = base.image.width();
    const int h = base.image.height();
    const Vec2 center{(w - 1.0) / 2.0, (h - 1.0) / 2.0};
    if (base.pose->size() != graph.num_parts()) {
      continue;  // validated upstream; kept non-fatal inside the parallel loop
    }

    for (int k = 0; k < num_rot; ++k) {
      const double deg = k * rotation_step_deg;
      const double rad = deg * std::numbers::pi / 180.0;
      const double cos_t = std::cos(rad);
      const double sin_t = std::sin(rad);

      AnnotatedImage copy;
      copy.id = base.id + "_r" + angle_label(deg);
      copy.image = k == 0 ? base.image
                          : rotate_image(base.image, cos_t, sin_t, center);
      Pose pose;
      pose.joints.reserve(base.pose->size());
      bool ok = true;
      for (const Vec2& j : base.pose->joints) {
        const Vec2 r = rotate_about(j, center, cos_t, sin_t);
        if (!on_grid(r, w, h)) {
          ok = false;
          break;
        }
        pose.joints.push_back(r);
      }
      if (!ok) {
        ++dropped_per[n];
        if (flip) ++dropped_per[n];  // the mirrored copy is lost with it
        continue;
      }
      copy.pose = std::move(pose);
      if (base.torso_box) {
        copy.torso_box = rotate_box(*base.torso_box, center, cos_t, sin_t, w, h);
      }

      if (flip) {
        AnnotatedImage mirrored = copy;
        if (flip_instance(mirrored, graph)) {
          slots[n].push_back(std::move(mirrored));
        } else {
          ++dropped_per[n];
        }
      }
      slots[n].push_back(std::move(copy));
    }
  }

  std::vector<AnnotatedImage> out;
  int dropped = 0;
  for (std::size_t n = 0; n < slots.size(); ++n) {
    dropped += dropped_per[n];
    for (AnnotatedImage& inst : slots[n]) out.push_back(std::move(inst));
  }
  if (dropped > 0) {
    std::cerr << "warning: dropped " << dropped
              << " augmented copies with off-grid joints\n";
  }
  if (stats != nullptr) {
    stats->produced = static_cast<int>(out.size());
    stats->dropped = dropped;
  }
  return out;
}

PartGraph add_midway_parts_graph(const PartGraph& base) {
  const int k = base.num_parts();
  std::vector<std::pair<int, int>> edges;
  edges.reserve(2 * base.num_edges());
  for (int e = 0; e < base.num_edges(); ++e) {
    const auto [a, b] = base.edges()[e];
    edges.emplace_back(a, k + e);
    edges.emplace_back(k + e, b);
  }

  std::vector<std::string> names = base.part_names();
  if (!names.empty()) {
    for (const auto& [a, b] : base.edges()) {
      names.push_back("mid_" + names[a] + "_" + names[b]);
    }
  }

  // Midpoints of mirrored edges become left/right pairs themselves.
  std::vector<int> mirror(k);
  for (int i = 0; i < k; ++i) mirror[i] = i;
  for (const auto& [l, r] : base.left_right_pairs()) {
    mirror[l] = r;
    mirror[r] = l;
  }
  std::map<std::pair<int, int>, int> edge_of;
  for (int e = 0; e < base.num_edges(); ++e) {
    const auto [a, b] = base.edges()[e];
    edge_of[{std::min(a, b), std::max(a, b)}] = e;
  }
  std::vector<std::pair<int, int>> pairs = base.left_right_pairs();
  for (int e = 0; e < base.num_edges(); ++e) {
    const auto [a, b] = base.edges()[e];
    const int ma = mirror[a];
    const int mb = mirror[b];
    const auto it = edge_of.find({std::min(ma, mb), std::max(ma, mb)});
    if (it != edge_of.end() && it->second > e) {
      pairs.emplace_back(k + e, k + it->second);
    }
  }
  return PartGraph(k + base.num_edges(), std::move(edges), base.root(),
                   std::move(names), std::move(pairs));
}

Pose add_midway_parts_pose(const Pose& pose, const PartGraph& base) {
  if (pose.size() != base.num_parts()) {
    throw ConfigError("pose does not match graph");
  }
  Pose out = pose;
  for (const auto& [a, b] : base.edges()) {
    out.joints.push_back((pose.joints[a] + pose.joints[b]) * 0.5);
  }
  return out;
}

std::pair<Pose, PartGraph> add_midway_parts(const Pose& pose,
                                            const PartGraph& base) {
  return {add_midway_parts_pose(pose, base), add_midway_parts_graph(base)};
}

}  // namespace idpr
