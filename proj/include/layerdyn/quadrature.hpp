#pragma once

// Quadrature primitives: adaptive tanh-sinh (double exponential) rule and
// fixed 15-point Gauss-Legendre panels.  tanh-sinh is the default for all
// integrals over a finite interval; it absorbs inverse-square-root endpoint
// behaviour without special casing.

#include <cmath>
#include <cstdio>
#include <string>
#include <utility>

#include "errors.hpp"

namespace layerdyn {

inline constexpr double kPi = 3.14159265358979323846264338327950288;

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int levels = 0;
  bool converged = false;
};

// Integrate f over [a,b] with the transform x = c + s*tanh((pi/2) sinh t).
// Levels double the node density; convergence is declared when two
// consecutive levels agree to max(atol, rtol*|I|).
template <class F>
QuadratureResult tanh_sinh(F&& f, double a, double b, double rtol = 1e-12,
                           double atol = 0.0, int max_level = 12) {
  const double c = 0.5 * (a + b);
  const double s = 0.5 * (b - a);
  const double half_pi = 0.5 * kPi;
  const double t_max = 6.5;

  auto node = [&](double t, double& contrib) -> bool {
    const double u = half_pi * std::sinh(t);
    const double sech = 1.0 / std::cosh(u);
    const double w = half_pi * std::cosh(t) * sech * sech;
    if (w < 1e-320) return false;
    const double x = std::tanh(u);
    contrib = w * (f(c + s * x) + f(c - s * x));
    return true;
  };

  double h = 1.0;
  double sum = half_pi * f(c);
  for (int j = 1; j * h <= t_max; ++j) {
    double contrib;
    if (!node(j * h, contrib)) break;
    sum += contrib;
  }
  double integral = s * h * sum;
  QuadratureResult res{integral, std::abs(integral), 0, false};

  for (int level = 1; level <= max_level; ++level) {
    h *= 0.5;
    double add = 0.0;
    for (int j = 1; j * h <= t_max; j += 2) {
      double contrib;
      if (!node(j * h, contrib)) break;
      add += contrib;
    }
    sum += add;
    const double next = s * h * sum;
    const double err = std::abs(next - integral);
    integral = next;
    res = {integral, err, level, false};
    if (level >= 3 && err <= std::max(atol, rtol * std::abs(integral))) {
      res.converged = true;
      break;
    }
  }
  return res;
}

template <class F>
double tanh_sinh_or_throw(F&& f, double a, double b, double rtol = 1e-12,
                          double atol = 0.0, const char* label = "integral") {
  auto r = tanh_sinh(std::forward<F>(f), a, b, rtol, atol);
  if (!r.converged) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "quadrature for %s did not converge: achieved %.3e (target %.3e)",
                  label, r.error_estimate, std::max(atol, rtol * std::abs(r.value)));
    throw NumericalError(buf);
  }
  return r.value;
}

namespace detail {
// 15-point Gauss-Legendre abscissae/weights on [-1,1] (positive half).
inline constexpr double kGauss15X[8] = {
    0.0,
    0.2011940939974345223006283033945962078128,
    0.3941513470775633698972073709810454683627,
    0.5709721726085388475372267372539106412383,
    0.7244177313601700474161860546139380096308,
    0.8482065834104272162006483207742168513662,
    0.9372733924007059043077589477102094712439,
    0.9879925180204854284895657185866125811469};
inline constexpr double kGauss15W[8] = {
    0.2025782419255612728806201999675193148386,
    0.1984314853271115764561183264438393248186,
    0.1861610000155622110268005618664228245062,
    0.1662692058169939335532008604812088111309,
    0.1395706779261543144478047945110283225208,
    0.1071592204671719350118695466858693034155,
    0.0703660474881081247092674164506673384667,
    0.0307532419961172683546283935772044177217};
}  // namespace detail

// Fixed 15-point Gauss-Legendre rule on [a,b].
template <class F>
double gauss15(F&& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double s = 0.5 * (b - a);
  double acc = detail::kGauss15W[0] * f(c);
  for (int i = 1; i < 8; ++i) {
    const double dx = s * detail::kGauss15X[i];
    acc += detail::kGauss15W[i] * (f(c + dx) + f(c - dx));
  }
  return acc * s;
}

// Composite Gauss rule with deterministic panel layout: panels of width at
// most `max_panel`, anchored at `a` so results vary smoothly with `b`.
template <class F>
double gauss15_composite(F&& f, double a, double b, double max_panel) {
  if (a == b) return 0.0;
  const double sign = b >= a ? 1.0 : -1.0;
  const double lo = std::min(a, b), hi = std::max(a, b);
  const int n = std::max(1, static_cast<int>(std::ceil((hi - lo) / max_panel)));
  const double w = (hi - lo) / n;
  double acc = 0.0;
  for (int k = 0; k < n; ++k) acc += gauss15(f, lo + k * w, lo + (k + 1) * w);
  return sign * acc;
}

}  // namespace layerdyn
