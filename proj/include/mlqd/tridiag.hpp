/**
 * @file tridiag.hpp
 * @brief Tridiagonal direct solve with partial pivoting (dgtsv-style).
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"

namespace mlqd {

/// Row i reads lower[i]*x[i-1] + diag[i]*x[i] + upper[i]*x[i+1] = rhs[i].
struct TridiagonalSystem {
  std::vector<double> lower;
  std::vector<double> diag;
  std::vector<double> upper;
  std::vector<double> rhs;

  explicit TridiagonalSystem(std::size_t n = 0)
      : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0), rhs(n, 0.0) {}
  [[nodiscard]] std::size_t size() const { return diag.size(); }
};

/// Gaussian elimination with row interchanges; the second superdiagonal
/// created by pivoting is kept in `upper2`. Throws NumericalError if the
/// matrix is singular to working precision.
inline std::vector<double> solve_tridiagonal(TridiagonalSystem sys) {
  const std::size_t n = sys.size();
  if (n == 0) return {};
  std::vector<double> &dl = sys.lower;
  std::vector<double> &d = sys.diag;
  std::vector<double> &du = sys.upper;
  std::vector<double> &b = sys.rhs;
  std::vector<double> du2(n, 0.0);

  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    scale = std::max({scale, std::abs(dl[i]), std::abs(d[i]), std::abs(du[i])});
  const double tiny = scale * 1e-300;

  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double sub = dl[i + 1];
    if (std::abs(d[i]) >= std::abs(sub)) {
      if (std::abs(d[i]) <= tiny)
        throw NumericalError("tridiagonal solve: zero pivot at row " + std::to_string(i));
      const double m = sub / d[i];
      d[i + 1] -= m * du[i];
      b[i + 1] -= m * b[i];
      dl[i + 1] = 0.0;
    } else {
      // Swap rows i and i+1.
      const double m = d[i] / sub;
      d[i] = sub;
      const double tmp_d = d[i + 1];
      d[i + 1] = du[i] - m * tmp_d;
      if (i + 2 < n) {
        du2[i] = du[i + 1];
        du[i + 1] = -m * du2[i];
      }
      du[i] = tmp_d;
      std::swap(b[i], b[i + 1]);
      b[i + 1] -= m * b[i];
      dl[i + 1] = 0.0;
    }
  }
  if (std::abs(d[n - 1]) <= tiny)
    throw NumericalError("tridiagonal solve: zero pivot at row " + std::to_string(n - 1));

  std::vector<double> x(n);
  x[n - 1] = b[n - 1] / d[n - 1];
  if (n > 1) x[n - 2] = (b[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
  if (n > 2)
    for (std::size_t k = n - 2; k-- > 0;)
      x[k] = (b[k] - du[k] * x[k + 1] - du2[k] * x[k + 2]) / d[k];
  for (double v : x)
    if (!std::isfinite(v)) throw NumericalError("tridiagonal solve: non-finite solution");
  return x;
}

} // namespace mlqd
