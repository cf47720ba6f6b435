#pragma once

// The glued N-layer states u^h, their approximate tangent vectors k^h_j, the
// barrier function Psi, the layer-coordinate matrix D, the Newton projection
// onto (h, w) coordinates, the channel energy, and the coercivity constant of
// the linearized operator on the orthogonal complement.

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"
#include "linalg.hpp"
#include "profile.hpp"

namespace layerdyn {

// ---------------------------------------------------------------------------
// Ordered layer positions with the reflected phantom layers h_0 = -h_1 and
// h_{N+1} = 2 - h_N.  Interval k (between h_{k-1} and h_k) carries the sign
// (-1)^k, so the glued state starts negative at x = 0.
class LayerVector {
 public:
  double eps = 0.0;
  double rho = 0.0;

  static LayerVector checked(std::vector<double> h, double eps, double rho) {
    LayerVector lv = unchecked(std::move(h), eps, rho);
    std::ostringstream os;
    if (!lv.validate_ordering()) {
      os << "layer positions must satisfy 0 < h_1 < ... < h_N < 1";
      throw DomainError(os.str());
    }
    if (!lv.in_omega_rho()) {
      os << "layer spacing " << lv.ell_min() << " at or below eps/rho = "
         << eps / rho;
      throw DomainError(os.str());
    }
    return lv;
  }

  // Geometry without the admissibility guard, for observables and finite
  // difference probes; membership is testable via in_omega_rho().
  static LayerVector unchecked(std::vector<double> h, double eps, double rho) {
    if (h.empty()) throw DomainError("layer vector must not be empty");
    if (!(eps > 0.0) || !(rho > 0.0))
      throw DomainError("layer vector needs positive eps and rho");
    LayerVector lv;
    lv.h_ = std::move(h);
    lv.eps = eps;
    lv.rho = rho;
    return lv;
  }

  int N() const { return static_cast<int>(h_.size()); }
  const std::vector<double>& positions() const { return h_; }

  // h_j for j = 0..N+1 including the reflected phantom layers.
  double at(int j) const {
    if (j == 0) return -h_[0];
    if (j == N() + 1) return 2.0 - h_.back();
    return h_[j - 1];
  }

  // Midpoint of interval k = 1..N+1; the outermost midpoints are exactly the
  // domain ends 0 and 1.
  double midpoint(int k) const {
    if (k == 1) return 0.0;
    if (k == N() + 1) return 1.0;
    return 0.5 * (at(k - 1) + at(k));
  }

  double spacing(int k) const { return at(k) - at(k - 1); }  // k = 1..N+1

  double ell_min() const {
    double m = 1e300;
    for (int k = 1; k <= N() + 1; ++k) m = std::min(m, spacing(k));
    return m;
  }

  bool validate_ordering() const {
    if (!(h_.front() > 0.0) || !(h_.back() < 1.0)) return false;
    for (std::size_t i = 1; i < h_.size(); ++i)
      if (!(h_[i] > h_[i - 1])) return false;
    return true;
  }

  bool in_omega_rho() const {
    return validate_ordering() && ell_min() > eps / rho;
  }

  double ends_margin() const { return ell_min() - eps / rho; }

  LayerVector shifted(int j, double delta) const {  // j = 1..N
    LayerVector lv = *this;
    lv.h_[j - 1] += delta;
    return lv;
  }

 private:
  std::vector<double> h_;
};

inline Branch interval_branch(int k) {
  return (k % 2 == 0) ? Branch::plus : Branch::minus;
}

// ---------------------------------------------------------------------------
// Quintic smooth step: monotone C^2, chi(-1)=0, chi(1)=1, chi(0)=1/2, and
// chi(x)+chi(-x)=1.
inline double smooth_step(double x) {
  if (x <= -1.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double t = 0.5 * (x + 1.0);
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

inline double smooth_step_d(double x) {
  if (x <= -1.0 || x >= 1.0) return 0.0;
  const double t = 0.5 * (x + 1.0);
  return 15.0 * t * t * (1.0 - t) * (1.0 - t);
}

// ---------------------------------------------------------------------------
struct UhField {
  GridField u, ux;
};

inline std::vector<std::shared_ptr<const ProfileSolution>> interval_profiles(
    const LayerVector& h, const PotentialSpec& spec) {
  std::vector<std::shared_ptr<const ProfileSolution>> prof(h.N() + 2);
  for (int k = 1; k <= h.N() + 1; ++k)
    prof[k] = amplitude_for_ratio(h.eps / h.spacing(k), interval_branch(k), spec);
  return prof;
}

// u^h and its x-derivative: the convex combination of neighbouring profiles
// blended by chi((x-h_j)/eps) inside each layer cell I_j.
inline UhField build_uh_with_derivative(const LayerVector& h,
                                        const PotentialSpec& spec,
                                        const Grid& grid) {
  const int N = h.N();
  const double eps = h.eps;
  auto prof = interval_profiles(h, spec);
  GridField u(grid), ux(grid);
  int j = 1;
  for (int i = 0; i < grid.M; ++i) {
    const double x = grid.x(i);
    while (j < N && x > h.midpoint(j + 1)) ++j;
    const double arg = (x - h.at(j)) / eps;
    const double chi = smooth_step(arg);
    const double chix = smooth_step_d(arg) / eps;
    double pj = 0.0, pjx = 0.0, pn = 0.0, pnx = 0.0;
    if (chi < 1.0) {
      auto [a, b] = prof[j]->eval(x - h.midpoint(j), eps);
      pj = a;
      pjx = b;
    }
    if (chi > 0.0) {
      auto [a, b] = prof[j + 1]->eval(x - h.midpoint(j + 1), eps);
      pn = a;
      pnx = b;
    }
    u[i] = (1.0 - chi) * pj + chi * pn;
    ux[i] = (1.0 - chi) * pjx + chi * pnx + chix * (pn - pj);
  }
  return {std::move(u), std::move(ux)};
}

inline GridField build_uh(const LayerVector& h, const PotentialSpec& spec,
                          const Grid& grid) {
  return build_uh_with_derivative(h, spec, grid).u;
}

// Approximate tangent vectors k^h_j = -gamma^j u^h_x, supported in I_j and
// equal to -u^h_x away from the cell edges.
inline std::vector<GridField> tangent_vectors_from(const LayerVector& h,
                                                   const GridField& ux) {
  const int N = h.N();
  const double eps = h.eps;
  const Grid grid = ux.grid;
  std::vector<GridField> ks(N, GridField(grid));
  for (int j = 1; j <= N; ++j) {
    const double lo = h.midpoint(j), hi = h.midpoint(j + 1);
    const int i0 = std::max(0, static_cast<int>(std::ceil(lo / grid.dx())));
    const int i1 =
        std::min(grid.M - 1, static_cast<int>(std::floor(hi / grid.dx())));
    for (int i = i0; i <= i1; ++i) {
      const double x = grid.x(i);
      const double g = smooth_step((x - lo - eps) / eps) *
                       (1.0 - smooth_step((x - hi + eps) / eps));
      ks[j - 1][i] = -g * ux[i];
    }
  }
  return ks;
}

inline std::vector<GridField> tangent_vectors(const LayerVector& h,
                                              const PotentialSpec& spec,
                                              const Grid& grid) {
  return tangent_vectors_from(h, build_uh_with_derivative(h, spec, grid).ux);
}

struct ManifoldFrame {
  UhField uh;
  std::vector<GridField> k;
};

inline ManifoldFrame build_frame(const LayerVector& h, const PotentialSpec& spec,
                                 const Grid& grid) {
  ManifoldFrame f{build_uh_with_derivative(h, spec, grid), {}};
  f.k = tangent_vectors_from(h, f.uh.ux);
  return f;
}

// ---------------------------------------------------------------------------
// L(u) = -eps^2 u_xx + f(u), fourth-order stencil with even reflection at the
// Neumann boundary.
inline GridField residual_L(const GridField& u, const PotentialSpec& spec,
                            double eps) {
  const int M = u.grid.M;
  const double dx = u.grid.dx();
  GridField out(u.grid);
  auto ref = [&](int i) {
    if (i < 0) return -i;
    if (i > M - 1) return 2 * (M - 1) - i;
    return i;
  };
  const double c = eps * eps / (12.0 * dx * dx);
  for (int i = 0; i < M; ++i) {
    const double uxx12 = -u[ref(i - 2)] + 16.0 * u[ref(i - 1)] - 30.0 * u[i] +
                         16.0 * u[ref(i + 1)] - u[ref(i + 2)];
    out[i] = -c * uxx12 + spec.f(u[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
enum class PsiMode { alpha_formula, inner_product };

// Barrier function: sum over layers of the squared alpha jumps, or of the
// squared projections of L(u^h) on the tangent vectors.
inline double barrier_psi(const LayerVector& h, const PotentialSpec& spec,
                          PsiMode mode = PsiMode::alpha_formula,
                          const Grid* grid = nullptr) {
  const int N = h.N();
  if (mode == PsiMode::alpha_formula) {
    std::vector<double> alpha(N + 2);
    for (int k = 1; k <= N + 1; ++k)
      alpha[k] =
          alpha_beta(h.eps / h.spacing(k), interval_branch(k), spec).first;
    double psi = 0.0;
    for (int j = 1; j <= N; ++j) {
      const double d = alpha[j] - alpha[j + 1];
      psi += d * d;
    }
    return psi;
  }
  if (grid == nullptr)
    throw DomainError("inner-product barrier mode needs a grid");
  auto frame = build_frame(h, spec, *grid);
  const GridField lres = residual_L(frame.uh.u, spec, h.eps);
  double psi = 0.0;
  for (int j = 0; j < N; ++j) {
    const double proj = inner_trapz(lres, frame.k[j]);
    psi += proj * proj;
  }
  return psi;
}

// ---------------------------------------------------------------------------
// Partial derivatives of u^h in the layer positions, by central differences
// with step eta (default 1e-6 eps).
inline std::vector<GridField> uh_partials(const LayerVector& h,
                                          const PotentialSpec& spec,
                                          const Grid& grid, double eta = 0.0) {
  if (eta <= 0.0) eta = 1e-6 * h.eps;
  const int N = h.N();
  std::vector<GridField> parts;
  parts.reserve(N);
  for (int j = 1; j <= N; ++j) {
    const GridField up = build_uh(h.shifted(j, eta), spec, grid);
    const GridField um = build_uh(h.shifted(j, -eta), spec, grid);
    GridField d(grid);
    for (int i = 0; i < grid.M; ++i) d[i] = (up[i] - um[i]) / (2.0 * eta);
    parts.push_back(std::move(d));
  }
  return parts;
}

// Second partial in a single coordinate (used by the smallness checks on the
// quadratic term of the layer equation); needs a larger step than the first
// derivative to stay above roundoff.
inline GridField uh_second_partial(const LayerVector& h,
                                   const PotentialSpec& spec, const Grid& grid,
                                   int j, double eta = 0.0) {
  if (eta <= 0.0) eta = 1e-2 * h.eps;
  const GridField up = build_uh(h.shifted(j, eta), spec, grid);
  const GridField u0 = build_uh(h, spec, grid);
  const GridField um = build_uh(h.shifted(j, -eta), spec, grid);
  GridField d(grid);
  for (int i = 0; i < grid.M; ++i)
    d[i] = (up[i] - 2.0 * u0[i] + um[i]) / (eta * eta);
  return d;
}

struct DMatrix {
  int N = 0;
  std::vector<double> a;  // row-major

  double at(int i, int j) const { return a[i * N + j]; }
  double& at(int i, int j) { return a[i * N + j]; }

  double dominance_margin() const {
    double m = 1e300;
    for (int i = 0; i < N; ++i) {
      double off = 0.0;
      for (int j = 0; j < N; ++j)
        if (j != i) off += std::abs(at(i, j));
      m = std::min(m, at(i, i) - off);
    }
    return m;
  }
};

inline DMatrix matrix_D(const LayerVector& h, const PotentialSpec& spec,
                        const Grid& grid) {
  const int N = h.N();
  auto ks = tangent_vectors(h, spec, grid);
  auto parts = uh_partials(h, spec, grid);
  DMatrix D;
  D.N = N;
  D.a.assign(N * N, 0.0);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) D.at(i, j) = inner_trapz(parts[j], ks[i]);
  if (!(D.dominance_margin() > 0.0))
    throw NumericalError("layer matrix lost diagonal dominance (degenerate configuration)");
  return D;
}

// ---------------------------------------------------------------------------
struct ManifoldCoords {
  LayerVector h;
  GridField w;
  GridField v;
  int newton_iterations = 0;
  double residual = 0.0;
};

// Newton projection of u onto (h, w) coordinates: drives <u - u^h, k^h_j> to
// zero using the Jacobian -D(h), with step halving on residual increase.
inline ManifoldCoords project(const GridField& u, const GridField& v,
                              const LayerVector& h_guess,
                              const PotentialSpec& spec, double sigma = 0.2,
                              int max_iter = 50) {
  const Grid grid = u.grid;
  const int N = h_guess.N();
  LayerVector h = LayerVector::checked(h_guess.positions(), h_guess.eps,
                                       h_guess.rho);

  auto residual_of = [&](const LayerVector& hv, ManifoldFrame& frame,
                         std::vector<double>& R) {
    frame = build_frame(hv, spec, grid);
    R.resize(N);
    double worst = 0.0;
    GridField diff(grid);
    for (int i = 0; i < grid.M; ++i) diff[i] = u[i] - frame.uh.u[i];
    for (int j = 0; j < N; ++j) {
      R[j] = inner_trapz(diff, frame.k[j]);
      worst = std::max(worst, std::abs(R[j]));
    }
    return worst;
  };

  ManifoldFrame frame;
  std::vector<double> R;
  double worst = residual_of(h, frame, R);

  const double tol = 1e-12;
  int iter = 0;
  int stall = 0;
  while (worst > tol && iter < max_iter) {
    ++iter;
    DMatrix D = matrix_D(h, spec, grid);
    std::vector<double> step = dense_solve(D.a, R);
    double scale = 1.0;
    bool accepted = false;
    for (int cut = 0; cut <= 8; ++cut, scale *= 0.5) {
      std::vector<double> cand = h.positions();
      for (int j = 0; j < N; ++j) cand[j] += scale * step[j];
      LayerVector hc = LayerVector::unchecked(cand, h.eps, h.rho);
      if (!hc.in_omega_rho()) continue;
      ManifoldFrame fc;
      std::vector<double> Rc;
      double wc;
      try {
        wc = residual_of(hc, fc, Rc);
      } catch (const DomainError&) {
        continue;
      }
      if (wc < worst || wc <= tol) {
        h = hc;
        frame = std::move(fc);
        R = std::move(Rc);
        stall = (wc > 0.5 * worst) ? stall + 1 : 0;
        worst = wc;
        accepted = true;
        break;
      }
    }
    if (!accepted || stall >= 3) break;
  }
  if (worst > 1e-10) {
    if (!h.in_omega_rho())
      throw DomainError("projection left the admissible layer set");
    GridField diff(grid);
    for (int i = 0; i < grid.M; ++i) diff[i] = u[i] - frame.uh.u[i];
    if (norm_linf(diff) >= sigma)
      throw DomainError("state too far from the layer manifold to project");
    std::ostringstream os;
    os << "projection stagnated at residual " << worst << " after " << iter
       << " iterations";
    throw NumericalError(os.str());
  }

  GridField w(grid);
  for (int i = 0; i < grid.M; ++i) w[i] = u[i] - frame.uh.u[i];
  // The tubular-coordinate distance is the remainder after projection.
  if (norm_linf(w) >= sigma)
    throw DomainError("state too far from the layer manifold to project");
  return ManifoldCoords{h, std::move(w), v, iter, worst};
}

inline double orthogonality_residual(const ManifoldCoords& c,
                                     const PotentialSpec& spec) {
  auto ks = tangent_vectors(c.h, spec, c.w.grid);
  double worst = 0.0;
  for (const auto& k : ks)
    worst = std::max(worst, std::abs(inner_trapz(c.w, k)));
  return worst;
}

// ---------------------------------------------------------------------------
// Channel energy (1/2)<w, L^h w> + (tau/2)||v||^2 + eps tau <w, v> with the
// quadratic form written through w_x.
inline double channel_energy(const LayerVector& h, const GridField& w,
                             const GridField& v, const PotentialSpec& spec,
                             double tau) {
  const Grid grid = w.grid;
  const GridField uh = build_uh(h, spec, grid);
  const GridField wx = derivative_central(w);
  GridField integrand(grid);
  const double e2 = h.eps * h.eps;
  for (int i = 0; i < grid.M; ++i)
    integrand[i] = e2 * wx[i] * wx[i] + spec.fp(uh[i]) * w[i] * w[i];
  return 0.5 * integral_trapz(integrand) + 0.5 * tau * inner_trapz(v, v) +
         h.eps * tau * inner_trapz(w, v);
}

// ---------------------------------------------------------------------------
// Smallest eigenvalue of w -> -eps^2 w_xx + q w (Neumann) restricted to the
// orthogonal complement of the given vectors, under the trapezoid inner
// product.  The operator is symmetrized with the weight square roots first.
inline double coercivity_min_eig(const Grid& grid, double eps,
                                 const std::vector<double>& q,
                                 const std::vector<GridField>& ks) {
  const int M = grid.M;
  const double dx = grid.dx();
  const double c = eps * eps / (dx * dx);
  std::vector<double> A(static_cast<std::size_t>(M) * M, 0.0);
  for (int i = 0; i < M; ++i) A[static_cast<std::size_t>(i) * M + i] = 2.0 * c + q[i];
  const double corner = -std::sqrt(2.0) * c;
  for (int i = 0; i + 1 < M; ++i) {
    const double off = (i == 0 || i == M - 2) ? corner : -c;
    A[static_cast<std::size_t>(i) * M + i + 1] = off;
    A[static_cast<std::size_t>(i + 1) * M + i] = off;
  }
  std::vector<std::vector<double>> constraints;
  for (const auto& k : ks) {
    std::vector<double> kt(M);
    for (int i = 0; i < M; ++i) {
      const double wgt = (i == 0 || i == M - 1) ? std::sqrt(0.5) : 1.0;
      kt[i] = k[i] * wgt;
    }
    constraints.push_back(std::move(kt));
  }
  return projected_symmetric_min_eigenvalue(std::move(A), M,
                                            std::move(constraints));
}

// Unconstrained smallest eigenvalue of the same operator (symmetric
// tridiagonal after weighting); the near-zero translation mode lives here.
inline double coercivity_min_eig_unconstrained(const Grid& grid, double eps,
                                               const std::vector<double>& q) {
  const int M = grid.M;
  const double dx = grid.dx();
  const double c = eps * eps / (dx * dx);
  std::vector<double> d(M), e(M - 1);
  for (int i = 0; i < M; ++i) d[i] = 2.0 * c + q[i];
  for (int i = 0; i + 1 < M; ++i)
    e[i] = (i == 0 || i == M - 2) ? -std::sqrt(2.0) * c : -c;
  return symtri_eigenvalues(std::move(d), std::move(e)).front();
}

// Coercivity constant of L^h on span{k^h_j}-perp.  A non-positive value flags
// a configuration outside the coercive regime; it is reported, not fatal.
inline double coercivity_lambda(const LayerVector& h, const PotentialSpec& spec,
                                const Grid& grid) {
  auto frame = build_frame(h, spec, grid);
  std::vector<double> q(grid.M);
  for (int i = 0; i < grid.M; ++i) q[i] = spec.fp(frame.uh.u[i]);
  return coercivity_min_eig(grid, h.eps, q, frame.k);
}

}  // namespace layerdyn
