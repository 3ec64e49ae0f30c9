#pragma once

#include <span>
#include <vector>

#include "idpr/grid.hpp"

namespace idpr {

// One axis of a separable concave-quadratic displacement cost
// a*d^2 + bcoef*d evaluated at d = p - q - r.
struct AxisQuad {
  double a = -1.0;
  double bcoef = 0.0;
  double r = 0.0;
};

struct QuadCost {
  AxisQuad x;
  AxisQuad y;
};

struct Gdt1d {
  std::vector<double> values;
  std::vector<int> argmax;
};

// values[p] = max_q f[q] + a*(p-q)^2 + bcoef*(p-q), exact in O(L) via the
// upper envelope of the shifted parabolas. Ties resolve to the smallest q.
Gdt1d gdt_1d(std::span<const double> f, double a, double bcoef);

struct Gdt2d {
  Grid<double> values;
  Grid<int> arg_x;
  Grid<int> arg_y;
};

// values[p] = max_q f[q] + cost.x at (px-qx-rx) + cost.y at (py-qy-ry),
// separable row pass then column pass. The real-valued offsets fold into
// an adjusted linear coefficient plus a constant, so the lattice stays
// integral and the result is exact.
Gdt2d gdt_2d(const Grid<double>& f, const QuadCost& cost);

namespace serial {
// Reference implementation of the same transform with plain loops.
Gdt2d gdt_2d(const Grid<double>& f, const QuadCost& cost);
}  // namespace serial

}  // namespace idpr
