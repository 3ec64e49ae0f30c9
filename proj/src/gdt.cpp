#include "idpr/gdt.hpp"

#include <limits>
#include <string>
#include <vector>

#include "idpr/error.hpp"
#include "idpr/weights.hpp"

namespace idpr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct EnvelopeWorkspace {
  std::vector<double> shifted;
  std::vector<int> roots;
  std::vector<double> bounds;

  void resize(int n) {
    shifted.resize(n);
    roots.resize(n);
    bounds.resize(n + 1);
  }
};

// Upper envelope of the parabolas a*(p-q)^2 + f[q] + bcoef*(p-q) over the
// integer lattice [0, n). The linear term is absorbed by shifting the input
// to f[q] - bcoef*q and adding bcoef*p back at query time, so the envelope
// itself is over pure parabolas. Ties go to the smallest q: the query scan
// stays on the earlier-rooted parabola when p sits exactly on a boundary.
void transform_axis(const double* f, int n, double a, double bcoef,
                    double* out_values, int* out_argmax,
                    EnvelopeWorkspace& ws) {
  ws.resize(n);
  double* fs = ws.shifted.data();
  for (int q = 0; q < n; ++q) fs[q] = f[q] - bcoef * q;

  int* v = ws.roots.data();
  double* z = ws.bounds.data();
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    double s;
    for (;;) {
      const int q1 = v[k];
      s = (fs[q] - fs[q1] +
           a * (static_cast<double>(q) * q - static_cast<double>(q1) * q1)) /
          (2.0 * a * (q - q1));
      if (s <= z[k]) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }

  k = 0;
  for (int p = 0; p < n; ++p) {
    while (z[k + 1] < p) ++k;
    const int q = v[k];
    const double d = p - q;
    out_values[p] = fs[q] + a * d * d + bcoef * p;
    out_argmax[p] = q;
  }
}

// Folding the real-valued offset r into the quadratic: the cost is
// evaluated at d = p - q - r, and expanding in u = p - q gives an adjusted
// linear coefficient and a constant, both exact.
double effective_bcoef(const AxisQuad& axis) {
  return axis.bcoef - 2.0 * axis.a * axis.r;
}

double offset_constant(const AxisQuad& axis) {
  return axis.a * axis.r * axis.r - axis.bcoef * axis.r;
}

void check_cost(const QuadCost& cost) {
  if (cost.x.a > -kQuadEps || cost.y.a > -kQuadEps) {
    throw ConcavityError("quadratic coefficients must be <= -" +
                         std::to_string(kQuadEps));
  }
}

}  // namespace

Gdt1d gdt_1d(std::span<const double> f, double a, double bcoef) {
  if (f.empty()) {
    throw ConfigError("gdt_1d needs at least one element");
  }
  if (a >= 0.0) {
    throw ConcavityError("quadratic coefficient must be negative");
  }
  const int n = static_cast<int>(f.size());
  Gdt1d out;
  out.values.resize(n);
  out.argmax.resize(n);
  EnvelopeWorkspace ws;
  transform_axis(f.data(), n, a, bcoef, out.values.data(), out.argmax.data(),
                 ws);
  return out;
}

Gdt2d gdt_2d(const Grid<double>& f, const QuadCost& cost) {
  check_cost(cost);
  const int w = f.width();
  const int h = f.height();
  if (w < 1 || h < 1) {
    throw ConfigError("gdt_2d needs a non-empty grid");
  }
  const double bx = effective_bcoef(cost.x);
  const double by = effective_bcoef(cost.y);
  const double shift = offset_constant(cost.x) + offset_constant(cost.y);

  Grid<double> inter(w, h);
  Grid<int> inter_qx(w, h);
  Gdt2d out{Grid<double>(w, h), Grid<int>(w, h), Grid<int>(w, h)};

#pragma omp parallel
  {
    EnvelopeWorkspace ws;
    std::vector<double> col(h);
    std::vector<double> col_v(h);
    std::vector<int> col_q(h);

#pragma omp for
    for (int y = 0; y < h; ++y) {
      transform_axis(f.row(y), w, cost.x.a, bx, inter.row(y), inter_qx.row(y),
                     ws);
    }

#pragma omp for
    for (int x = 0; x < w; ++x) {
      for (int y = 0; y < h; ++y) col[y] = inter(x, y);
      transform_axis(col.data(), h, cost.y.a, by, col_v.data(), col_q.data(),
                     ws);
      for (int y = 0; y < h; ++y) {
        const int qy = col_q[y];
        out.values(x, y) = col_v[y] + shift;
        out.arg_y(x, y) = qy;
        out.arg_x(x, y) = inter_qx(x, qy);
      }
    }
  }
  return out;
}

namespace serial {

Gdt2d gdt_2d(const Grid<double>& f, const QuadCost& cost) {
  check_cost(cost);
  const int w = f.width();
  const int h = f.height();
  if (w < 1 || h < 1) {
    throw ConfigError("gdt_2d needs a non-empty grid");
  }
  const double bx = effective_bcoef(cost.x);
  const double by = effective_bcoef(cost.y);
  const double shift = offset_constant(cost.x) + offset_constant(cost.y);

  Grid<double> inter(w, h);
  Grid<int> inter_qx(w, h);
  Gdt2d out{Grid<double>(w, h), Grid<int>(w, h), Grid<int>(w, h)};

  EnvelopeWorkspace ws;
  for (int y = 0; y < h; ++y) {
    transform_axis(f.row(y), w, cost.x.a, bx, inter.row(y), inter_qx.row(y),
                   ws);
  }
  std::vector<double> col(h);
  std::vector<double> col_v(h);
  std::vector<int> col_q(h);
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) col[y] = inter(x, y);
    transform_axis(col.data(), h, cost.y.a, by, col_v.data(), col_q.data(),
                   ws);
    for (int y = 0; y < h; ++y) {
      const int qy = col_q[y];
      out.values(x, y) = col_v[y] + shift;
      out.arg_y(x, y) = qy;
      out.arg_x(x, y) = inter_qx(x, qy);
    }
  }
  return out;
}

}  // namespace serial

}  // namespace idpr
