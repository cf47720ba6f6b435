#pragma once

// Uniform grid on [0,1] and grid-sampled fields.  Inner products use the
// trapezoid rule throughout (one Simpson variant exists for the quadrature
// sensitivity check).

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "errors.hpp"

namespace layerdyn {

struct Grid {
  int M = 0;  // node count; nodes x_i = i/(M-1)

  double dx() const { return 1.0 / (M - 1); }
  double x(int i) const { return double(i) / (M - 1); }

  bool operator==(const Grid& o) const { return M == o.M; }

  void require_resolution(double eps) const {
    if (!(M >= 2)) throw DomainError("grid needs at least 2 nodes");
    if (dx() > eps / 8.0 + 1e-15)
      throw DomainError("grid violates the resolution rule dx <= eps/8");
  }
};

struct GridField {
  Grid grid;
  std::vector<double> v;

  GridField() = default;
  explicit GridField(Grid g, double fill = 0.0)
      : grid(g), v(static_cast<std::size_t>(g.M), fill) {}
  GridField(Grid g, std::vector<double> values) : grid(g), v(std::move(values)) {
    if (static_cast<int>(v.size()) != g.M)
      throw DomainError("field length does not match grid");
  }

  int size() const { return grid.M; }
  double& operator[](int i) { return v[i]; }
  double operator[](int i) const { return v[i]; }
};

inline double inner_trapz(const GridField& a, const GridField& b) {
  const int M = a.grid.M;
  double acc = 0.5 * (a[0] * b[0] + a[M - 1] * b[M - 1]);
  for (int i = 1; i < M - 1; ++i) acc += a[i] * b[i];
  return acc * a.grid.dx();
}

// Simpson-rule variant (M odd); used only to check quadrature sensitivity.
inline double inner_simpson(const GridField& a, const GridField& b) {
  const int M = a.grid.M;
  if (M % 2 == 0) throw DomainError("Simpson rule needs an odd node count");
  double acc = a[0] * b[0] + a[M - 1] * b[M - 1];
  for (int i = 1; i < M - 1; ++i)
    acc += a[i] * b[i] * (i % 2 == 1 ? 4.0 : 2.0);
  return acc * a.grid.dx() / 3.0;
}

inline double norm_l2(const GridField& a) {
  return std::sqrt(std::max(0.0, inner_trapz(a, a)));
}

inline double norm_linf(const GridField& a) {
  double m = 0.0;
  for (double x : a.v) m = std::max(m, std::abs(x));
  return m;
}

inline double integral_trapz(const GridField& a) {
  const int M = a.grid.M;
  double acc = 0.5 * (a[0] + a[M - 1]);
  for (int i = 1; i < M - 1; ++i) acc += a[i];
  return acc * a.grid.dx();
}

// Second-order first derivative with even (Neumann) reflection at the ends.
inline GridField derivative_central(const GridField& u) {
  const int M = u.grid.M;
  GridField d(u.grid);
  const double inv2dx = 0.5 / u.grid.dx();
  d[0] = 0.0;       // reflection makes the boundary derivative vanish
  d[M - 1] = 0.0;
  for (int i = 1; i < M - 1; ++i) d[i] = (u[i + 1] - u[i - 1]) * inv2dx;
  return d;
}

inline bool all_finite(const GridField& u) {
  for (double x : u.v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace layerdyn
