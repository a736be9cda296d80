#include "ram/simplex.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ram {

std::optional<std::vector<double>> solve_feasibility(const std::vector<std::vector<double>>& a,
                                                     const std::vector<double>& b, double tol) {
  const int m = static_cast<int>(a.size());
  const int n = m > 0 ? static_cast<int>(a[0].size()) : 0;
  if (static_cast<int>(b.size()) != m) throw std::invalid_argument("simplex: shape mismatch");

  // Tableau over [x | artificials | rhs], artificials basic at start.
  const int cols = n + m + 1;
  std::vector<std::vector<double>> tab(m, std::vector<double>(cols, 0.0));
  std::vector<int> basis(m);
  for (int r = 0; r < m; ++r) {
    const double flip = b[r] < 0.0 ? -1.0 : 1.0;
    for (int c = 0; c < n; ++c) tab[r][c] = flip * a[r][c];
    tab[r][n + r] = 1.0;
    tab[r][cols - 1] = flip * b[r];
    basis[r] = n + r;
  }

  // Reduced costs for minimizing the sum of artificials.
  std::vector<double> cost(cols, 0.0);
  for (int c = n; c < n + m; ++c) cost[c] = 1.0;
  std::vector<double> reduced = cost;
  double objective = 0.0;
  for (int r = 0; r < m; ++r) {
    objective -= tab[r][cols - 1];
    for (int c = 0; c < cols; ++c) reduced[c] -= tab[r][c];
  }

  const long max_iters = 4L * (m + n + 4) * (m + n + 4);
  for (long iter = 0; iter < max_iters; ++iter) {
    // Bland's rule: smallest improving column.
    int entering = -1;
    for (int c = 0; c < n + m; ++c)
      if (reduced[c] < -tol) {
        entering = c;
        break;
      }
    if (entering < 0) break;

    int leaving = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int r = 0; r < m; ++r) {
      if (tab[r][entering] <= tol) continue;
      const double ratio = tab[r][cols - 1] / tab[r][entering];
      if (ratio < best_ratio - tol ||
          (ratio < best_ratio + tol && (leaving < 0 || basis[r] < basis[leaving]))) {
        best_ratio = ratio;
        leaving = r;
      }
    }
    if (leaving < 0) throw std::runtime_error("simplex: phase-one objective unbounded");

    const double pivot = tab[leaving][entering];
    for (int c = 0; c < cols; ++c) tab[leaving][c] /= pivot;
    for (int r = 0; r < m; ++r) {
      if (r == leaving) continue;
      const double factor = tab[r][entering];
      if (factor == 0.0) continue;
      for (int c = 0; c < cols; ++c) tab[r][c] -= factor * tab[leaving][c];
    }
    const double factor = reduced[entering];
    for (int c = 0; c < cols; ++c) reduced[c] -= factor * tab[leaving][c];
    objective -= factor * tab[leaving][cols - 1];
    basis[leaving] = entering;
  }

  double artificial_mass = 0.0;
  for (int r = 0; r < m; ++r)
    if (basis[r] >= n) artificial_mass += std::abs(tab[r][cols - 1]);
  if (artificial_mass > tol * (1.0 + static_cast<double>(m))) return std::nullopt;

  std::vector<double> x(n, 0.0);
  for (int r = 0; r < m; ++r)
    if (basis[r] < n) x[basis[r]] = std::max(0.0, tab[r][cols - 1]);
  return x;
}

}  // namespace ram
