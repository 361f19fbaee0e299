#pragma once

#include <cstddef>
#include <vector>

namespace orchardsim {

/// Row-major cost matrix.
struct CostMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> cost;

  double at(std::size_t r, std::size_t c) const { return cost[r * cols + c]; }
};

/// Minimum-cost assignment (Hungarian method with potentials, O(n^2 m)).
/// Returns, per row, the assigned column or -1; exactly min(rows, cols)
/// rows are assigned. The result depends only on the matrix contents.
std::vector<int> solve_assignment(const CostMatrix& m);

}  // namespace orchardsim
