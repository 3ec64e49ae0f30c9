#include "idpr/evidence.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "idpr/error.hpp"
#include "idpr/patch.hpp"

namespace idpr {

namespace {

double floored_log(double mass) {
  if (mass <= 0.0) return kLogFloor;
  return std::max(std::log(mass), kLogFloor);
}

}  // namespace

double marginal_appearance(std::span<const double> dist,
                           const SpaceIndex& space, int part) {
  if (part < 0 || part >= space.num_parts()) {
    throw BoundsError("part index " + std::to_string(part) + " out of range");
  }
  if (static_cast<int>(dist.size()) != space.flat_size()) {
    throw ConfigError("distribution size does not match the label space");
  }
  const int begin = space.part_block_begin(part);
  const int size = space.part_block_size(part);
  double mass = 0.0;
  for (int i = begin; i < begin + size; ++i) mass += dist[i];
  return floored_log(mass);
}

double marginal_idpr(std::span<const double> dist, const SpaceIndex& space,
                     int part, int neighbor, int type) {
  if (part < 0 || part >= space.num_parts()) {
    throw BoundsError("part index " + std::to_string(part) + " out of range");
  }
  if (static_cast<int>(dist.size()) != space.flat_size()) {
    throw ConfigError("distribution size does not match the label space");
  }
  const int slot = space.neighbor_slot(part, neighbor);
  const int radix = space.slot_radix(part, slot);
  if (type < 0 || type >= radix) {
    throw InvalidTypeError("type " + std::to_string(type) +
                           " out of range for parts " + std::to_string(part) +
                           "->" + std::to_string(neighbor));
  }
  const int begin = space.part_block_begin(part);
  const int size = space.part_block_size(part);
  const int stride = space.slot_stride(part, slot);

  double part_mass = 0.0;
  for (int i = begin; i < begin + size; ++i) part_mass += dist[i];
  if (part_mass <= 0.0) return kLogFloor;

  double type_mass = 0.0;
  const int group = stride * radix;
  for (int hi = 0; hi < size / group; ++hi) {
    const int base = begin + hi * group + type * stride;
    for (int lo = 0; lo < stride; ++lo) type_mass += dist[base + lo];
  }
  return floored_log(type_mass / part_mass);
}

namespace {

ScoreMapStack make_stack(const PartGraph& graph, const SpaceIndex& space,
                         int width, int height, int stride) {
  std::vector<std::pair<int, int>> dir_parts;
  std::vector<int> type_counts;
  for (int d = 0; d < graph.num_directed_edges(); ++d) {
    const auto [i, j] = graph.directed_endpoints(d);
    dir_parts.emplace_back(i, j);
    type_counts.push_back(space.slot_radix(i, space.neighbor_slot(i, j)));
  }
  return ScoreMapStack(width, height, stride, graph.num_parts(),
                       std::move(dir_parts), std::move(type_counts));
}

void marginalize_into(ScoreMapStack& stack, const PartGraph& graph,
                      const SpaceIndex& space, std::span<const double> dist,
                      int x, int y) {
  for (int i = 0; i < graph.num_parts(); ++i) {
    stack.appearance(i)(x, y) =
        static_cast<float>(marginal_appearance(dist, space, i));
  }
  for (int d = 0; d < graph.num_directed_edges(); ++d) {
    const auto [i, j] = graph.directed_endpoints(d);
    for (int t = 0; t < stack.type_count(d); ++t) {
      stack.idpr(d, t)(x, y) =
          static_cast<float>(marginal_idpr(dist, space, i, j, t));
    }
  }
}

int nearest_lattice(int p, int stride, int limit) {
  const int last = ((limit - 1) / stride) * stride;
  const int snapped =
      static_cast<int>((p + stride / 2) / stride) * stride;
  return std::min(snapped, last);
}

void replicate_plane(Grid<float>& plane, int stride) {
  const int w = plane.width();
  const int h = plane.height();
  for (int y = 0; y < h; ++y) {
    const int sy = nearest_lattice(y, stride, h);
    for (int x = 0; x < w; ++x) {
      const int sx = nearest_lattice(x, stride, w);
      if (sx != x || sy != y) plane(x, y) = plane(sx, sy);
    }
  }
}

void replicate_off_lattice(ScoreMapStack& stack) {
  const int stride = stack.stride();
  if (stride <= 1) return;
  for (int i = 0; i < stack.num_parts(); ++i) {
    replicate_plane(stack.appearance(i), stride);
  }
  for (int d = 0; d < stack.num_directed_edges(); ++d) {
    for (int t = 0; t < stack.type_count(d); ++t) {
      replicate_plane(stack.idpr(d, t), stride);
    }
  }
}

void check_inputs(const Image& image, const PatchClassifier& classifier,
                  const SpaceIndex& space, int stride) {
  if (stride < 1) {
    throw ConfigError("stride must be >= 1");
  }
  const int side = classifier.config().patch_side;
  if (image.width() < side || image.height() < side) {
    throw DataError("image " + std::to_string(image.width()) + "x" +
                    std::to_string(image.height()) +
                    " is smaller than one patch (side " +
                    std::to_string(side) + ")");
  }
  if (classifier.num_classes() != space.flat_size()) {
    throw ConfigError("classifier output size does not match the label space");
  }
}

}  // namespace

ScoreMapStack compute_score_maps(const Image& image,
                                 const PatchClassifier& classifier,
                                 const PartGraph& graph,
                                 const SpaceIndex& space, int stride) {
  check_inputs(image, classifier, space, stride);
  ScoreMapStack stack =
      make_stack(graph, space, image.width(), image.height(), stride);
  const int side = classifier.config().patch_side;

#pragma omp parallel
  {
#pragma omp for
    for (int y = 0; y < image.height(); y += stride) {
      for (int x = 0; x < image.width(); x += stride) {
        const Image patch = extract_patch(image, x, y, side);
        const auto dist = predict_distribution(classifier, patch);
        marginalize_into(stack, graph, space, dist, x, y);
      }
    }
  }
  replicate_off_lattice(stack);
  return stack;
}

namespace serial {

ScoreMapStack compute_score_maps(const Image& image,
                                 const PatchClassifier& classifier,
                                 const PartGraph& graph,
                                 const SpaceIndex& space, int stride) {
  check_inputs(image, classifier, space, stride);
  ScoreMapStack stack =
      make_stack(graph, space, image.width(), image.height(), stride);
  const int side = classifier.config().patch_side;
  for (int y = 0; y < image.height(); y += stride) {
    for (int x = 0; x < image.width(); x += stride) {
      const Image patch = extract_patch(image, x, y, side);
      const auto dist = predict_distribution(classifier, patch);
      marginalize_into(stack, graph, space, dist, x, y);
    }
  }
  replicate_off_lattice(stack);
  return stack;
}

}  // namespace serial

}  // namespace idpr
