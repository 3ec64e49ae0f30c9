#include "idpr/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "idpr/error.hpp"
#include "idpr/score.hpp"

namespace idpr {

namespace {

// Per-axis expansion of forward + reverse deformation terms in
// delta = l_child - l_parent:
//   wf0*(d - rf) + wf1*(d - rf)^2 + wr0*(-d - rr) + wr1*(-d - rr)^2
// = (wf1 + wr1) d^2 + (wf0 - 2 wf1 rf + 2 wr1 rr - wr0) d
//   + wf1 rf^2 - wf0 rf + wr1 rr^2 - wr0 rr
void expand_axis(double wf_lin, double wf_quad, double wr_lin, double wr_quad,
                 double rf, double rr, AxisQuad& out, double& constant) {
  out.a = wf_quad + wr_quad;
  out.bcoef = wf_lin - 2.0 * wf_quad * rf + 2.0 * wr_quad * rr - wr_lin;
  out.r = 0.0;
  constant += wf_quad * rf * rf - wf_lin * rf + wr_quad * rr * rr - wr_lin * rr;
}

struct EdgeContext {
  int dir_fwd;  // parent -> child
  int dir_rev;  // child -> parent
  int types_fwd;
  int types_rev;
};

EdgeContext edge_context(const PartGraph& graph, const RelationModel& relations,
                         int parent, int child) {
  EdgeContext ctx;
  ctx.dir_fwd = graph.directed_id(parent, child);
  ctx.dir_rev = graph.directed_id(child, parent);
  ctx.types_fwd = relations.type_count(ctx.dir_fwd);
  ctx.types_rev = relations.type_count(ctx.dir_rev);
  return ctx;
}

void check_consistency(const ScoreMapStack& maps, const Weights& weights,
                       const RelationModel& relations, const PartGraph& graph,
                       ModelMode mode) {
  if (mode != weights.mode) {
    throw ConfigError(std::string("mode/weights mismatch: inference wants ") +
                      to_string(mode) + ", weights carry " +
                      to_string(weights.mode));
  }
  validate_weights(weights, graph, relations);
  if (maps.num_parts() != graph.num_parts() ||
      maps.num_directed_edges() != graph.num_directed_edges()) {
    throw ConfigError("score maps do not match graph");
  }
  for (int d = 0; d < graph.num_directed_edges(); ++d) {
    if (maps.type_count(d) != relations.type_count(d)) {
      throw ConfigError("score maps and relation model disagree on type "
                        "counts for directed edge " +
                        std::to_string(d));
    }
  }
}

struct MaskWindow {
  int part;
  int x_lo, x_hi, y_lo, y_hi;  // inclusive
};

MaskWindow resolve_mask(const RootMask& mask, const PartGraph& graph, int w,
                        int h) {
  MaskWindow win;
  win.part = mask.part < 0 ? graph.root() : mask.part;
  if (win.part >= graph.num_parts()) {
    throw ConfigError("mask part index out of range");
  }
  win.x_lo = std::max(static_cast<int>(std::ceil(mask.x0)), 0);
  win.x_hi = std::min(static_cast<int>(std::floor(mask.x1)), w - 1);
  win.y_lo = std::max(static_cast<int>(std::ceil(mask.y0)), 0);
  win.y_hi = std::min(static_cast<int>(std::floor(mask.y1)), h - 1);
  if (win.x_lo > win.x_hi || win.y_lo > win.y_hi) {
    throw ConfigError("mask window does not intersect the grid");
  }
  return win;
}

// Weighted appearance per part, with the mask penalty stamped outside the
// window of the designated part.
std::vector<Grid<double>> weighted_unaries(const ScoreMapStack& maps,
                                           const Weights& weights,
                                           const std::optional<MaskWindow>& win) {
  const int w = maps.width();
  const int h = maps.height();
  std::vector<Grid<double>> unary(maps.num_parts());
  for (int i = 0; i < maps.num_parts(); ++i) {
    unary[i] = Grid<double>(w, h);
    const Grid<float>& app = maps.appearance(i);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        unary[i](x, y) = weights.unary[i] * static_cast<double>(app(x, y));
      }
    }
    if (win && win->part == i) {
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          if (x < win->x_lo || x > win->x_hi || y < win->y_lo ||
              y > win->y_hi) {
            unary[i](x, y) = kMaskPenalty;
          }
        }
      }
    }
  }
  return unary;
}

// Flat-order scan; strictly-greater updates keep the smallest flat index
// among ties.
std::pair<int, double> argmax_flat(const Grid<double>& g) {
  int best = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  const double* p = g.data();
  const int n = static_cast<int>(g.size());
  for (int f = 0; f < n; ++f) {
    if (p[f] > best_v) {
      best_v = p[f];
      best = f;
    }
  }
  return {best, best_v};
}

struct ChildTables {
  Grid<double> message;
  Grid<int> from_x, from_y;
  Grid<int> t_fwd, t_rev;
};

}  // namespace

CombinedQuad combined_quadratic(const Weights& weights,
                                const RelationModel& relations,
                                const PartGraph& graph, int parent, int child,
                                int t_forward, int t_reverse) {
  if (weights.mode == ModelMode::kUnaryOnly) {
    throw ConfigError("unary-only weights carry no deformation terms");
  }
  const EdgeContext ctx = edge_context(graph, relations, parent, child);
  const Vec2 rf = relations.mean_offset(ctx.dir_fwd, t_forward);
  const Vec2 rr = relations.mean_offset(ctx.dir_rev, t_reverse);
  const auto& wf = weights.deform.at(ctx.dir_fwd).at(t_forward);
  const auto& wr = weights.deform.at(ctx.dir_rev).at(t_reverse);

  CombinedQuad out;
  expand_axis(wf[0], wf[1], wr[0], wr[1], rf.x, rr.x, out.cost.x, out.constant);
  expand_axis(wf[2], wf[3], wr[2], wr[3], rf.y, rr.y, out.cost.y, out.constant);
  if (out.cost.x.a >= 0.0 || out.cost.y.a >= 0.0) {
    throw ConcavityError("combined quadratic is not concave");
  }
  return out;
}

namespace {

ChildTables compute_message(const Grid<double>& child_subtree,
                            const ScoreMapStack& maps, const Weights& weights,
                            const RelationModel& relations,
                            const PartGraph& graph, int parent, int child) {
  const int w = maps.width();
  const int h = maps.height();
  const EdgeContext ctx = edge_context(graph, relations, parent, child);
  const bool full = weights.mode == ModelMode::kFull;
  const int num_pairs = ctx.types_fwd * ctx.types_rev;

  struct PairResult {
    Gdt2d gdt;
    double constant;
  };
  std::vector<PairResult> pairs(num_pairs);

#pragma omp parallel for schedule(dynamic)
  for (int pid = 0; pid < num_pairs; ++pid) {
    const int t_fwd = pid / ctx.types_rev;
    const int t_rev = pid % ctx.types_rev;
    Grid<double> g = child_subtree;
    if (full) {
      const Grid<float>& ev = maps.idpr(ctx.dir_rev, t_rev);
      const double wv = weights.idpr[ctx.dir_rev];
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          g(x, y) += wv * static_cast<double>(ev(x, y));
        }
      }
    }
    CombinedQuad cq =
        combined_quadratic(weights, relations, graph, parent, child, t_fwd,
                           t_rev);
    // The transform works in p - q = -(delta); flip the linear coefficient.
    const QuadCost flipped{{cq.cost.x.a, -cq.cost.x.bcoef, 0.0},
                           {cq.cost.y.a, -cq.cost.y.bcoef, 0.0}};
    double constant = cq.constant;
    if (!full) {
      constant += weights.prior_bias[ctx.dir_fwd][t_fwd] +
                  weights.prior_bias[ctx.dir_rev][t_rev];
    }
    pairs[pid] = PairResult{gdt_2d(g, flipped), constant};
  }

  ChildTables tables{Grid<double>(w, h), Grid<int>(w, h), Grid<int>(w, h),
                     Grid<int>(w, h), Grid<int>(w, h)};

  // Deterministic max over type pairs in lexicographic order; strict
  // updates keep the smallest pair on ties.
#pragma omp parallel for
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double best = -std::numeric_limits<double>::infinity();
      int best_pid = 0;
      for (int pid = 0; pid < num_pairs; ++pid) {
        double v = pairs[pid].gdt.values(x, y) + pairs[pid].constant;
        if (full) {
          const int t_fwd = pid / ctx.types_rev;
          v += weights.idpr[ctx.dir_fwd] *
               static_cast<double>(maps.idpr(ctx.dir_fwd, t_fwd)(x, y));
        }
        if (v > best) {
          best = v;
          best_pid = pid;
        }
      }
      tables.message(x, y) = best;
      tables.from_x(x, y) = pairs[best_pid].gdt.arg_x(x, y);
      tables.from_y(x, y) = pairs[best_pid].gdt.arg_y(x, y);
      tables.t_fwd(x, y) = best_pid / ctx.types_rev;
      tables.t_rev(x, y) = best_pid % ctx.types_rev;
    }
  }
  return tables;
}

}  // namespace

InferenceResult infer(const ScoreMapStack& maps, const Weights& weights,
                      const RelationModel& relations, const PartGraph& graph,
                      const std::optional<RootMask>& mask, ModelMode mode) {
  check_consistency(maps, weights, relations, graph, mode);
  const int w = maps.width();
  const int h = maps.height();
  const int num_parts = graph.num_parts();

  std::optional<MaskWindow> win;
  if (mask) win = resolve_mask(*mask, graph, w, h);

  std::vector<Grid<double>> unary = weighted_unaries(maps, weights, win);

  InferenceResult result;
  result.pose.joints.assign(num_parts, Vec2{});
  result.types.types.assign(graph.num_directed_edges(), 0);
  result.per_part_scores.assign(num_parts, 0.0);

  if (mode == ModelMode::kUnaryOnly) {
    double total = weights.bias;
    for (int i = 0; i < num_parts; ++i) {
      const auto [flat, value] = argmax_flat(unary[i]);
      result.pose.joints[i] = Vec2{static_cast<double>(flat % w),
                                   static_cast<double>(flat / w)};
      result.per_part_scores[i] = value;
      total += value;
    }
    result.score = total;
    return result;
  }

  // Children first: each part's subtree score is its weighted unary plus
  // the incoming messages.
  std::vector<Grid<double>> subtree(num_parts);
  std::vector<ChildTables> tables(num_parts);
  const auto& order = graph.topo_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int i = *it;
    subtree[i] = unary[i];
    for (int k : graph.children(i)) {
      tables[k] = compute_message(subtree[k], maps, weights, relations, graph,
                                  i, k);
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          subtree[i](x, y) += tables[k].message(x, y);
        }
      }
      subtree[k] = Grid<double>();  // backtracking only needs the tables
    }
  }

  const int root = graph.root();
  const auto [root_flat, root_value] = argmax_flat(subtree[root]);
  result.score = root_value + weights.bias;

  // Walk back down in topological order: every parent location is fixed
  // before its children are read.
  std::vector<std::pair<int, int>> cells(num_parts);
  cells[root] = {root_flat % w, root_flat / w};
  for (int i : order) {
    const auto [x, y] = cells[i];
    for (int k : graph.children(i)) {
      cells[k] = {tables[k].from_x(x, y), tables[k].from_y(x, y)};
      result.types.types[graph.directed_id(i, k)] = tables[k].t_fwd(x, y);
      result.types.types[graph.directed_id(k, i)] = tables[k].t_rev(x, y);
    }
  }
  for (int i = 0; i < num_parts; ++i) {
    result.pose.joints[i] = Vec2{static_cast<double>(cells[i].first),
                                 static_cast<double>(cells[i].second)};
    result.per_part_scores[i] = unary[i](cells[i].first, cells[i].second);
  }
  return result;
}

InferenceResult brute_force_infer(const ScoreMapStack& maps,
                                  const Weights& weights,
                                  const RelationModel& relations,
                                  const PartGraph& graph,
                                  const std::optional<RootMask>& mask,
                                  ModelMode mode) {
  check_consistency(maps, weights, relations, graph, mode);
  const int w = maps.width();
  const int h = maps.height();
  const int num_parts = graph.num_parts();
  const int cells = w * h;

  std::optional<MaskWindow> win;
  if (mask) win = resolve_mask(*mask, graph, w, h);

  double configs = 1.0;
  for (int i = 0; i < num_parts; ++i) configs *= cells;
  if (mode != ModelMode::kUnaryOnly) {
    for (int d = 0; d < graph.num_directed_edges(); ++d) {
      configs *= relations.type_count(d);
    }
  }
  if (configs > 1e8) {
    throw GuardError("exhaustive search over " + std::to_string(configs) +
                     " configurations exceeds the 1e8 guard");
  }

  const int num_dirs = graph.num_directed_edges();
  Pose pose;
  pose.joints.assign(num_parts, Vec2{});
  TypeAssignment types;
  types.types.assign(num_dirs, 0);

  InferenceResult best;
  best.score = -std::numeric_limits<double>::infinity();

  std::vector<int> loc(num_parts, 0);
  for (;;) {
    bool allowed = true;
    for (int i = 0; i < num_parts; ++i) {
      const int x = loc[i] % w;
      const int y = loc[i] / w;
      pose.joints[i] = Vec2{static_cast<double>(x), static_cast<double>(y)};
      if (win && win->part == i &&
          (x < win->x_lo || x > win->x_hi || y < win->y_lo || y > win->y_hi)) {
        allowed = false;
        break;
      }
    }
    if (allowed) {
      std::fill(types.types.begin(), types.types.end(), 0);
      for (;;) {
        const double s =
            full_score(pose, types, maps, weights, graph, relations);
        if (s > best.score) {
          best.score = s;
          best.pose = pose;
          best.types = types;
        }
        if (mode == ModelMode::kUnaryOnly) break;
        int d = num_dirs - 1;
        while (d >= 0 &&
               ++types.types[d] == relations.type_count(d)) {
          types.types[d] = 0;
          --d;
        }
        if (d < 0) break;
      }
    }
    int i = num_parts - 1;
    while (i >= 0 && ++loc[i] == cells) {
      loc[i] = 0;
      --i;
    }
    if (i < 0) break;
  }

  best.per_part_scores.assign(num_parts, 0.0);
  for (int i = 0; i < num_parts; ++i) {
    const auto [x, y] = snap_to_grid(best.pose.joints[i], w, h);
    best.per_part_scores[i] =
        weights.unary[i] * static_cast<double>(maps.appearance(i)(x, y));
  }
  return best;
}

}  // namespace idpr
