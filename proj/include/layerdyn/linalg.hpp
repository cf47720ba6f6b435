#pragma once

// Small linear-algebra kernels used across the toolkit: tridiagonal solves,
// dense solves for layer-count sized systems, a symmetric-tridiagonal
// eigenvalue routine (implicit QL with shifts), and thin LAPACK wrappers for
// the dense symmetric / general eigensolves.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "errors.hpp"

extern "C" {
void dsyev_(const char* jobz, const char* uplo, const int* n, double* a,
            const int* lda, double* w, double* work, const int* lwork,
            int* info);
void dgeev_(const char* jobvl, const char* jobvr, const int* n, double* a,
            const int* lda, double* wr, double* wi, double* vl,
            const int* ldvl, double* vr, const int* ldvr, double* work,
            const int* lwork, int* info);
}

namespace layerdyn {

// Thomas algorithm for a tridiagonal system; diag/lower/upper are destroyed.
// Intended for diagonally dominant systems (no pivoting).
inline std::vector<double> tridiag_solve(std::vector<double> lower,
                                         std::vector<double> diag,
                                         std::vector<double> upper,
                                         std::vector<double> rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    if (diag[i - 1] == 0.0) throw NumericalError("tridiag_solve: zero pivot");
    const double m = lower[i - 1] / diag[i - 1];
    diag[i] -= m * upper[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  std::vector<double> x(n);
  x[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;)
    x[i] = (rhs[i] - upper[i] * x[i + 1]) / diag[i];
  return x;
}

// Dense solve with partial pivoting, for layer-count sized systems (n <~ 16).
// a is row-major n*n and is destroyed.
inline std::vector<double> dense_solve(std::vector<double> a,
                                       std::vector<double> b) {
  const int n = static_cast<int>(b.size());
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(a[i * n + k]) > std::abs(a[piv * n + k])) piv = i;
    if (a[piv * n + k] == 0.0) throw NumericalError("dense_solve: singular matrix");
    if (piv != k) {
      for (int j = 0; j < n; ++j) std::swap(a[k * n + j], a[piv * n + j]);
      std::swap(b[k], b[piv]);
    }
    for (int i = k + 1; i < n; ++i) {
      const double m = a[i * n + k] / a[k * n + k];
      a[i * n + k] = 0.0;
      for (int j = k + 1; j < n; ++j) a[i * n + j] -= m * a[k * n + j];
      b[i] -= m * b[k];
    }
  }
  std::vector<double> x(n);
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n; ++j) s -= a[i * n + j] * x[j];
    x[i] = s / a[i * n + i];
  }
  return x;
}

// Eigenvalues of a symmetric tridiagonal matrix by the implicit QL algorithm
// with Wilkinson-style shifts.  d = diagonal (n), e = subdiagonal (n-1).
// Returns eigenvalues in ascending order.
inline std::vector<double> symtri_eigenvalues(std::vector<double> d,
                                              std::vector<double> e) {
  const int n = static_cast<int>(d.size());
  if (n == 0) return {};
  e.push_back(0.0);
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= 1e-300 || std::abs(e[m]) + dd == dd) break;
      }
      if (m != l) {
        if (iter++ == 60)
          throw NumericalError("symtri_eigenvalues: too many QL iterations");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + (g >= 0 ? std::abs(r) : -std::abs(r)));
        double s = 1.0, c = 1.0, p = 0.0;
        int i;
        for (i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  std::sort(d.begin(), d.end());
  return d;
}

// All eigenvalues of a dense symmetric matrix (row-major n*n) via LAPACK.
inline std::vector<double> dense_symmetric_eigenvalues(std::vector<double> a,
                                                       int n) {
  std::vector<double> w(n);
  int lwork = std::max(1, 34 * n), info = 0;
  std::vector<double> work(lwork);
  dsyev_("N", "U", &n, a.data(), &n, w.data(), work.data(), &lwork, &info);
  if (info != 0) throw NumericalError("dsyev failed");
  return w;
}

// All eigenvalues of a dense general matrix (row-major n*n) via LAPACK.
// Eigenvalues of A^T equal those of A, so no transpose is needed.
inline std::vector<std::complex<double>> dense_eigenvalues(
    std::vector<double> a, int n) {
  std::vector<double> wr(n), wi(n);
  int lwork = std::max(1, 8 * n), info = 0;
  std::vector<double> work(lwork);
  dgeev_("N", "N", &n, a.data(), &n, wr.data(), wi.data(), nullptr, &n,
         nullptr, &n, work.data(), &lwork, &info);
  if (info != 0) throw NumericalError("dgeev failed");
  std::vector<std::complex<double>> out(n);
  for (int i = 0; i < n; ++i) out[i] = {wr[i], wi[i]};
  return out;
}

// Smallest eigenvalue of a dense symmetric operator restricted to the
// orthogonal complement of the given constraint vectors.  The constraints are
// deflated with Householder reflectors applied two-sided, then the trailing
// block is handed to LAPACK.  a is row-major n*n (symmetric).
inline double projected_symmetric_min_eigenvalue(
    std::vector<double> a, int n, std::vector<std::vector<double>> constraints) {
  const int nc = static_cast<int>(constraints.size());
  if (nc == 0) {
    auto w = dense_symmetric_eigenvalues(std::move(a), n);
    return w.front();
  }
  // QR of the constraint block: after k reflectors, constraint k is supported
  // on entries [0..k]; the complement is spanned by coordinates nc..n-1.
  std::vector<std::vector<double>> vs;
  for (int k = 0; k < nc; ++k) {
    std::vector<double>& c = constraints[k];
    for (const auto& v : vs) {  // apply previous reflectors
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += v[i] * c[i];
      for (int i = 0; i < n; ++i) c[i] -= 2.0 * s * v[i];
    }
    double norm = 0.0;
    for (int i = k; i < n; ++i) norm += c[i] * c[i];
    norm = std::sqrt(norm);
    if (norm < 1e-300)
      throw NumericalError("projected eigensolve: dependent constraints");
    std::vector<double> v(n, 0.0);
    const double alpha = c[k] >= 0 ? -norm : norm;
    v[k] = c[k] - alpha;
    for (int i = k + 1; i < n; ++i) v[i] = c[i];
    double vn = 0.0;
    for (int i = k; i < n; ++i) vn += v[i] * v[i];
    vn = std::sqrt(vn);
    for (int i = k; i < n; ++i) v[i] /= vn;
    vs.push_back(std::move(v));
  }
  for (const auto& v : vs) {  // A <- H A H for each reflector
    std::vector<double> av(n, 0.0);
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += a[i * n + j] * v[j];
      av[i] = s;
    }
    double vav = 0.0;
    for (int i = 0; i < n; ++i) vav += v[i] * av[i];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        a[i * n + j] += -2.0 * v[i] * av[j] - 2.0 * av[i] * v[j] +
                        4.0 * vav * v[i] * v[j];
  }
  const int m = n - nc;
  std::vector<double> block(m * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) block[i * m + j] = a[(i + nc) * n + (j + nc)];
  auto w = dense_symmetric_eigenvalues(std::move(block), m);
  return w.front();
}

}  // namespace layerdyn
