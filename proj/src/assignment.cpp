#include "orchardsim/assignment.hpp"

#include <limits>

namespace orchardsim {

std::vector<int> solve_assignment(const CostMatrix& m) {
  if (m.rows == 0 || m.cols == 0) return std::vector<int>(m.rows, -1);
  // The shortest-augmenting-path form needs rows <= cols; transpose otherwise.
  const bool transposed = m.rows > m.cols;
  const std::size_t n = transposed ? m.cols : m.rows;
  const std::size_t k = transposed ? m.rows : m.cols;
  auto cost = [&](std::size_t i, std::size_t j) { return transposed ? m.at(j - 1, i - 1) : m.at(i - 1, j - 1); };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based potentials u (rows) and v (cols); p[j] = row matched to column j.
  std::vector<double> u(n + 1, 0.0), v(k + 1, 0.0);
  std::vector<std::size_t> p(k + 1, 0), way(k + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(k + 1, kInf);
    std::vector<char> used(k + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= k; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {  // strict: lowest column index wins ties
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= k; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> result(m.rows, -1);
  for (std::size_t j = 1; j <= k; ++j) {
    if (p[j] == 0) continue;
    if (transposed) {
      result[j - 1] = static_cast<int>(p[j] - 1);
    } else {
      result[p[j] - 1] = static_cast<int>(j - 1);
    }
  }
  return result;
}

}  // namespace orchardsim
