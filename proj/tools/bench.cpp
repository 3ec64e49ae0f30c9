#include "bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "idpr/classifier.hpp"
#include "idpr/evidence.hpp"
#include "idpr/gdt.hpp"
#include "idpr/inference.hpp"
#include "idpr/part_graph.hpp"
#include "idpr/relation_model.hpp"
#include "idpr/rng.hpp"
#include "idpr/score_maps.hpp"
#include "idpr/space_index.hpp"
#include "idpr/synth.hpp"
#include "idpr/weights.hpp"

namespace idpr::bench {
namespace {

using Clock = std::chrono::steady_clock;

double median_ms(std::vector<double>& samples) {
  std::sort(samples.begin(), samples.end());
  return samples[samples.size() / 2];
}

template <typename Fn>
double time_median_ms(int repeats, Fn&& fn) {
  std::vector<double> samples;
  for (int r = 0; r < repeats; ++r) {
    const auto start = Clock::now();
    fn();
    const auto stop = Clock::now();
    samples.push_back(
        std::chrono::duration<double, std::milli>(stop - start).count());
  }
  return median_ms(samples);
}

struct Problem {
  PartGraph graph;
  RelationModel relations;
  Weights weights;
  ScoreMapStack maps;
};

Problem build_problem(int num_parts, int side, int types, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i + 1 < num_parts; ++i) edges.emplace_back(i, i + 1);
  PartGraph graph(num_parts, std::move(edges), 0);

  std::vector<std::vector<Vec2>> offsets(graph.num_directed_edges());
  for (auto& per_dir : offsets) {
    for (int t = 0; t < types; ++t) {
      per_dir.emplace_back(rng.uniform(-side / 8.0, side / 8.0),
                           rng.uniform(-side / 8.0, side / 8.0));
    }
  }
  RelationModel relations(graph, std::move(offsets));

  Weights w = default_weights(ModelMode::kFull, graph, relations);
  for (auto& per_dir : w.deform) {
    for (auto& coeffs : per_dir) {
      coeffs = {rng.uniform(-0.2, 0.2), -rng.uniform(0.5, 2.0),
                rng.uniform(-0.2, 0.2), -rng.uniform(0.5, 2.0)};
    }
  }
  for (double& v : w.idpr) v = rng.uniform(0.2, 1.0);

  ScoreMapStack maps = make_score_map_stack(graph, relations, side, side, 1);
  for (int i = 0; i < num_parts; ++i) {
    for (float& v : maps.appearance(i).cells()) {
      v = static_cast<float>(rng.uniform(-1.0, 0.0));
    }
  }
  for (int d = 0; d < graph.num_directed_edges(); ++d) {
    for (int t = 0; t < types; ++t) {
      for (float& v : maps.idpr(d, t).cells()) {
        v = static_cast<float>(rng.uniform(-1.0, 0.0));
      }
    }
  }
  return Problem{std::move(graph), std::move(relations), std::move(w),
                 std::move(maps)};
}

struct Row {
  int parts;
  int side;
  int types;
  double ms;
};

void ratio_check(const char* label, double ratio, double lo, double hi) {
  std::printf("  %-28s %6.2f  window [%g, %g]  %s\n", label, ratio, lo, hi,
              ratio >= lo && ratio <= hi ? "ok" : "WARN (outside window)");
}

void kernel_comparison(int repeats) {
  std::printf("\nparallel kernels vs serial references\n");
  Rng rng(7);

  Grid<double> f(128, 128);
  for (double& v : f.cells()) v = rng.uniform(-5.0, 5.0);
  const QuadCost cost{{-0.8, 0.1, 0.3}, {-1.2, -0.2, -0.1}};
  Gdt2d par_result, ser_result;
  const double par_ms =
      time_median_ms(repeats, [&] { par_result = gdt_2d(f, cost); });
  const double ser_ms =
      time_median_ms(repeats, [&] { ser_result = serial::gdt_2d(f, cost); });
  const bool gdt_same = par_result.values == ser_result.values &&
                        par_result.arg_x == ser_result.arg_x &&
                        par_result.arg_y == ser_result.arg_y;
  std::printf("  %-24s parallel %8.3f ms  serial %8.3f ms  speedup %5.2fx  "
              "bit-identical: %s\n",
              "gdt_2d 128x128", par_ms, ser_ms, ser_ms / par_ms,
              gdt_same ? "yes" : "NO");

  SynthConfig synth_cfg;
  synth_cfg.num_positives = 1;
  synth_cfg.num_negatives = 0;
  synth_cfg.width = 32;
  synth_cfg.height = 32;
  synth_cfg.num_parts = 3;
  synth_cfg.seed = 11;
  const auto figures = synth_stickfigures(synth_cfg);
  const Image& sample = figures.first[0].image;
  PartGraph graph = synth_graph(3);
  RelationModel relations = RelationModel::uniform(graph, 2);
  SpaceIndex space(graph, relations);

  ClassifierConfig ccfg;
  ccfg.patch_side = 9;
  ccfg.hidden_units = 16;
  PatchClassifier::Params params;
  params.input_dim = feature_dim(ccfg.features, ccfg.patch_side);
  params.hidden = ccfg.hidden_units;
  params.classes = space.flat_size();
  params.w1.resize(static_cast<std::size_t>(params.hidden) * params.input_dim);
  params.b1.resize(params.hidden);
  params.w2.resize(static_cast<std::size_t>(params.classes) * params.hidden);
  params.b2.resize(params.classes);
  for (double& v : params.w1) v = rng.uniform(-0.3, 0.3);
  for (double& v : params.w2) v = rng.uniform(-0.3, 0.3);
  PatchClassifier classifier(ccfg, std::move(params));

  ScoreMapStack par_maps, ser_maps;
  const double maps_par_ms = time_median_ms(repeats, [&] {
    par_maps = compute_score_maps(sample, classifier, graph, space, 1);
  });
  const double maps_ser_ms = time_median_ms(repeats, [&] {
    ser_maps = serial::compute_score_maps(sample, classifier, graph, space, 1);
  });
  std::printf("  %-24s parallel %8.3f ms  serial %8.3f ms  speedup %5.2fx  "
              "bit-identical: %s\n",
              "score maps 32x32", maps_par_ms, maps_ser_ms,
              maps_ser_ms / maps_par_ms, par_maps == ser_maps ? "yes" : "NO");
}

}  // namespace

void run(const std::string& json_path, int repeats, bool quick) {
  const std::vector<int> all_parts = quick ? std::vector<int>{4}
                                           : std::vector<int>{4, 8};
  const std::vector<int> all_sides = quick ? std::vector<int>{32, 64}
                                           : std::vector<int>{32, 64, 128};
  const std::vector<int> all_types = {2, 4, 8};

  std::vector<Row> rows;
  std::printf("exact inference wall time (median of %d runs)\n", repeats);
  std::printf("  %5s %9s %5s %12s\n", "parts", "grid", "types", "median ms");
  for (int parts : all_parts) {
    for (int side : all_sides) {
      for (int types : all_types) {
        Problem p = build_problem(parts, side, types,
                                  0x9e01u + parts * 131 + side * 7 + types);
        volatile double sink = 0.0;
        const double ms = time_median_ms(repeats, [&] {
          const InferenceResult r = infer(p.maps, p.weights, p.relations,
                                          p.graph, std::nullopt,
                                          ModelMode::kFull);
          sink = sink + r.score;
        });
        rows.push_back({parts, side, types, ms});
        std::printf("  %5d %4dx%-4d %5d %12.3f\n", parts, side, side, types,
                    ms);
      }
    }
  }

  auto find_ms = [&](int parts, int side, int types) -> std::optional<double> {
    for (const Row& r : rows) {
      if (r.parts == parts && r.side == side && r.types == types) return r.ms;
    }
    return std::nullopt;
  };

  std::printf("\nscaling ratios\n");
  for (int parts : all_parts) {
    for (int side : all_sides) {
      const auto t2 = find_ms(parts, side, 2);
      const auto t4 = find_ms(parts, side, 4);
      const auto t8 = find_ms(parts, side, 8);
      char label[64];
      if (t2 && t4) {
        std::snprintf(label, sizeof(label), "T 2->4 (K=%d, %dx%d)", parts,
                      side, side);
        ratio_check(label, *t4 / *t2, 3.0, 6.0);
      }
      if (t4 && t8) {
        std::snprintf(label, sizeof(label), "T 4->8 (K=%d, %dx%d)", parts,
                      side, side);
        ratio_check(label, *t8 / *t4, 3.0, 6.0);
      }
    }
    for (std::size_t s = 0; s + 1 < all_sides.size(); ++s) {
      const auto small = find_ms(parts, all_sides[s], 4);
      const auto big = find_ms(parts, all_sides[s + 1], 4);
      if (small && big) {
        char label[64];
        std::snprintf(label, sizeof(label), "L %d->%d (K=%d, T=4)",
                      all_sides[s] * all_sides[s],
                      all_sides[s + 1] * all_sides[s + 1], parts);
        ratio_check(label, *big / *small, 3.0, 8.0);
      }
    }
  }
  if (all_parts.size() > 1) {
    for (int side : all_sides) {
      const auto k4 = find_ms(4, side, 4);
      const auto k8 = find_ms(8, side, 4);
      if (k4 && k8) {
        char label[64];
        std::snprintf(label, sizeof(label), "K 4->8 (%dx%d, T=4)", side, side);
        ratio_check(label, *k8 / *k4, 1.7, 3.0);
      }
    }
  }

  kernel_comparison(repeats);

  if (!json_path.empty()) {
    nlohmann::json j = nlohmann::json::array();
    for (const Row& r : rows) {
      j.push_back({{"parts", r.parts},
                   {"grid_side", r.side},
                   {"types", r.types},
                   {"median_ms", r.ms}});
    }
    std::ofstream out(json_path);
    out << j.dump(2) << '\n';
  }
}

}  // namespace idpr::bench
