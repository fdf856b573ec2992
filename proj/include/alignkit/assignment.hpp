#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace alignkit {

/// Square cost matrix in row-major order.
struct CostMatrix {
  std::size_t size = 0;
  std::vector<double> values;

  double operator()(std::size_t i, std::size_t j) const { return values[i * size + j]; }
};

/// Minimum-cost perfect assignment of an N x N cost matrix.
///
/// Solved with the Hungarian method (shortest augmenting paths with
/// potentials, O(N^3)). Among all optimal assignments the one whose column
/// sequence (row 0's column, row 1's column, ...) is lexicographically
/// smallest is returned; optimal assignments are exactly the perfect
/// matchings of the tight-edge graph of the final potentials, which the
/// refinement pass walks row by row.
///
/// Returns the assigned column for every row.
inline std::vector<std::size_t> solve_assignment(const CostMatrix& cost) {
  const std::size_t n = cost.size;
  if (n == 0) return {};
  constexpr double inf = std::numeric_limits<double>::infinity();

  // 1-based potentials and matching, row 0 / column 0 are sentinels.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> col_owner(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    col_owner[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = col_owner[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[col_owner[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (col_owner[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      col_owner[j0] = col_owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::size_t> row_col(n), col_row(n);
  for (std::size_t j = 1; j <= n; ++j) {
    row_col[col_owner[j] - 1] = j - 1;
    col_row[j - 1] = col_owner[j] - 1;
  }

  double scale = 1.0;
  for (double c : cost.values) scale = std::max(scale, std::abs(c));
  const double eps = 1e-10 * scale;
  auto tight = [&](std::size_t i, std::size_t j) {
    return std::abs(cost(i, j) - u[i + 1] - v[j + 1]) <= eps;
  };

  // Lexicographic refinement over tight edges.
  std::vector<bool> col_fixed(n, false);
  std::vector<bool> visited(n);
  constexpr std::size_t none = static_cast<std::size_t>(-1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (col_fixed[j] || !tight(i, j)) continue;
      if (row_col[i] == j) break;
      // Give column j to row i; its previous owner r must reach i's old
      // column through an alternating path among unfixed rows and columns.
      const std::size_t freed = row_col[i];
      const std::size_t r = col_row[j];
      std::fill(visited.begin(), visited.end(), false);
      visited[j] = true;
      std::vector<std::size_t> saved_row_col = row_col, saved_col_row = col_row;
      col_row[freed] = none;
      row_col[i] = j;
      col_row[j] = i;
      auto augment = [&](auto&& self, std::size_t row) -> bool {
        for (std::size_t c = 0; c < n; ++c) {
          if (col_fixed[c] || visited[c] || !tight(row, c)) continue;
          visited[c] = true;
          if (col_row[c] == none || self(self, col_row[c])) {
            row_col[row] = c;
            col_row[c] = row;
            return true;
          }
        }
        return false;
      };
      if (augment(augment, r)) break;
      row_col = std::move(saved_row_col);
      col_row = std::move(saved_col_row);
    }
    col_fixed[row_col[i]] = true;
  }
  return row_col;
}

}  // namespace alignkit
