#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "nlbound/errors.hpp"

namespace nlbound {

using DenseMatrix = std::vector<std::vector<double>>;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
inline std::vector<double> jacobi_eigenvalues(DenseMatrix a, double tol = 1e-14, int max_sweeps = 100) {
  const std::size_t n = a.size();
  for (const auto& row : a)
    if (row.size() != n) throw DimensionMismatch("jacobi_eigenvalues needs a square matrix");

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        total += a[i][j] * a[i][j];
        if (i != j) off += a[i][j] * a[i][j];
      }
    if (off <= tol * tol * std::max(total, 1e-300)) break;

    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {  // columns p, q
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {  // rows p, q
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i];
  std::sort(ev.begin(), ev.end());
  return ev;
}

inline double lambda_max(const DenseMatrix& a) {
  const auto ev = jacobi_eigenvalues(a);
  return ev.empty() ? 0.0 : ev.back();
}

/// Induced 2-norm: sqrt(lambda_max(D D^T)).
inline double spectral_norm(const DenseMatrix& d) {
  const std::size_t r = d.size();
  DenseMatrix ddt(r, std::vector<double>(r, 0.0));
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < d[i].size(); ++k) s += d[i][k] * d[j][k];
      ddt[i][j] = s;
    }
  return std::sqrt(std::max(0.0, lambda_max(ddt)));
}

/// Gershgorin upper bound on lambda_max: max_i (a_ii + sum_{j != i} |a_ij|).
inline double gershgorin_upper(const DenseMatrix& a) {
  double best = -HUGE_VAL;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double r = a[i][i];
    for (std::size_t j = 0; j < a.size(); ++j)
      if (j != i) r += std::fabs(a[i][j]);
    best = std::max(best, r);
  }
  return best;
}

/// zeta_n = 1/v* - 1 where v* = min w_i  s.t.  sum_j w_j = 1, 0 <= w_j <= w_i.
///
/// A vertex of the feasible set fixes each w_j (j != i) at one of its two
/// bounds; with k of them at w_i the equality gives w_i = 1/(k+1). Only the
/// count k matters, so the enumeration is over k = 0..n-1.
inline double zeta(int n) {
  if (n < 2) throw InvalidDimension("zeta requires n >= 2");
  double v_best = HUGE_VAL;
  for (int k = 0; k <= n - 1; ++k) v_best = std::min(v_best, 1.0 / (k + 1));
  return 1.0 / v_best - 1.0;
}

/// Upper bound on lambda_max: max_i (a_ii + zeta_n max_{j != i} |a_ij|).
inline double zeta_upper(const DenseMatrix& a) {
  const int n = static_cast<int>(a.size());
  const double z = zeta(n);
  double best = -HUGE_VAL;
  for (int i = 0; i < n; ++i) {
    double m = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != i) m = std::max(m, std::fabs(a[i][j]));
    best = std::max(best, a[i][i] + z * m);
  }
  return best;
}

}  // namespace nlbound
