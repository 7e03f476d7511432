#pragma once

#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace mot {

// Entries set to kForbidden are excluded from matching entirely.
inline constexpr double kForbidden = std::numeric_limits<double>::infinity();

// Dense row-major cost matrix. Rows are tracks, columns are detections in the
// first association stage, but the solver itself is generic.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, double fill = kForbidden);

  double& at(std::size_t r, std::size_t c);
  double at(std::size_t r, std::size_t c) const;

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct AssignmentResult {
  std::vector<std::pair<int, int>> matches;  // (row, col), ascending rows
  std::vector<int> unmatched_rows;
  std::vector<int> unmatched_cols;
  double total_cost = 0.0;
};

// One-to-one matching over the finite entries that maximizes the number of
// matches and, among those, minimizes total cost. Successive shortest
// augmenting paths with dual potentials; exact, not greedy. Finite entries
// must be non-negative.
AssignmentResult solve_assignment(const CostMatrix& costs);

}  // namespace mot
