#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace ebdg {

struct LpResult {
  enum class Status { optimal, unbounded, iteration_limit } status = Status::optimal;
  double objective = 0.0;
  std::vector<double> x;
  int iterations = 0;
};

/// Dense simplex for: maximize c^T x subject to A x <= b, x >= 0, with b >= 0
/// so that the origin is a feasible starting vertex. Bland's rule prevents
/// cycling on the degenerate rows (b = 0) that these problems contain.
/// A is row-major, m x n.
inline LpResult solve_lp_max(const std::vector<double>& c, const std::vector<double>& A,
                             const std::vector<double>& b, double pivot_tol = 1e-12) {
  const std::size_t n = c.size();
  const std::size_t m = b.size();
  if (A.size() != m * n) throw std::invalid_argument("solve_lp_max: A has wrong size");
  for (double bi : b) {
    if (bi < 0.0) throw std::invalid_argument("solve_lp_max: b must be non-negative");
  }
  // Tableau columns: n structural + m slack + rhs. Last row is the objective.
  const std::size_t cols = n + m + 1;
  std::vector<double> T((m + 1) * cols, 0.0);
  auto at = [&](std::size_t r, std::size_t col) -> double& { return T[r * cols + col]; };
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) at(i, j) = A[i * n + j];
    at(i, n + i) = 1.0;
    at(i, cols - 1) = b[i];
    basis[i] = n + i;
  }
  for (std::size_t j = 0; j < n; ++j) at(m, j) = -c[j];

  LpResult res;
  const int max_iter = 50 * static_cast<int>(m + n) + 1000;
  for (res.iterations = 0; res.iterations < max_iter; ++res.iterations) {
    std::size_t enter = cols;
    for (std::size_t j = 0; j + 1 < cols; ++j) {
      if (at(m, j) < -pivot_tol) {
        enter = j;
        break;
      }
    }
    if (enter == cols) break;
    std::size_t leave = m;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      const double a = at(i, enter);
      if (a <= pivot_tol) continue;
      const double ratio = at(i, cols - 1) / a;
      if (ratio < best - 1e-15 || (std::abs(ratio - best) <= 1e-15 && leave < m && basis[i] < basis[leave])) {
        best = ratio;
        leave = i;
      }
    }
    if (leave == m) {
      res.status = LpResult::Status::unbounded;
      return res;
    }
    const double piv = at(leave, enter);
    for (std::size_t j = 0; j < cols; ++j) at(leave, j) /= piv;
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == leave) continue;
      const double f = at(i, enter);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < cols; ++j) at(i, j) -= f * at(leave, j);
    }
    basis[leave] = enter;
  }
  if (res.iterations >= max_iter) {
    res.status = LpResult::Status::iteration_limit;
    return res;
  }
  res.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < n) res.x[basis[i]] = at(i, cols - 1);
  }
  res.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) res.objective += c[j] * res.x[j];
  return res;
}

}  // namespace ebdg
