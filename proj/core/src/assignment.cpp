#include "mot/assignment.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mot {

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

double& CostMatrix::at(std::size_t r, std::size_t c) {
  return data_[r * cols_ + c];
}

double CostMatrix::at(std::size_t r, std::size_t c) const {
  return data_[r * cols_ + c];
}

namespace {

// One round of the successive-shortest-path method: a Dijkstra sweep over the
// residual graph in reduced costs, rooted at every unmatched row at once.
// Settling an unmatched column ends the sweep; augmenting through it adds one
// match at the smallest possible cost increase, so the matching stays
// cost-minimal at every cardinality and tops out at maximum cardinality.
struct SspState {
  std::vector<double> p_row, p_col;    // dual potentials
  std::vector<int> col4row, row4col;   // current matching
  std::vector<double> dist_row, dist_col;
  std::vector<char> done_row, done_col;
  std::vector<int> parent_col;  // row that reaches each column
};

bool augment_once(const CostMatrix& cost, SspState& s) {
  const int nr = static_cast<int>(cost.rows());
  const int nc = static_cast<int>(cost.cols());
  for (int i = 0; i < nr; ++i) {
    s.dist_row[i] = s.col4row[i] == -1 ? 0.0 : kForbidden;
    s.done_row[i] = 0;
  }
  std::fill(s.dist_col.begin(), s.dist_col.end(), kForbidden);
  std::fill(s.done_col.begin(), s.done_col.end(), 0);
  std::fill(s.parent_col.begin(), s.parent_col.end(), -1);

  int sink = -1;
  double sink_dist = kForbidden;
  for (;;) {
    // Next unsettled node; rows win ties, then lower index, for determinism.
    int best_row = -1, best_col = -1;
    double best = kForbidden;
    for (int i = 0; i < nr; ++i) {
      if (!s.done_row[i] && s.dist_row[i] < best) {
        best = s.dist_row[i];
        best_row = i;
      }
    }
    for (int j = 0; j < nc; ++j) {
      if (!s.done_col[j] && s.dist_col[j] < best) {
        best = s.dist_col[j];
        best_row = -1;
        best_col = j;
      }
    }
    if (best_row == -1 && best_col == -1) return false;  // nothing reachable

    if (best_row >= 0) {
      const int i = best_row;
      s.done_row[i] = 1;
      for (int j = 0; j < nc; ++j) {
        if (s.done_col[j] || j == s.col4row[i]) continue;
        const double c = cost.at(i, j);
        if (c == kForbidden) continue;
        const double nd = s.dist_row[i] + c + s.p_row[i] - s.p_col[j];
        if (nd < s.dist_col[j]) {
          s.dist_col[j] = nd;
          s.parent_col[j] = i;
        }
      }
    } else {
      const int j = best_col;
      if (s.row4col[j] == -1) {  // settled a free column: optimal sink
        sink = j;
        sink_dist = s.dist_col[j];
        break;
      }
      s.done_col[j] = 1;
      const int i = s.row4col[j];  // backward edge to the matched row
      const double nd = s.dist_col[j] - cost.at(i, j) + s.p_col[j] - s.p_row[i];
      if (nd < s.dist_row[i]) s.dist_row[i] = nd;
    }
  }

  // Dual update, Jonker-Volgenant style: shift nodes the sweep priced below
  // the sink by (their distance - sink distance) and leave the rest alone.
  // Keeps every residual reduced cost non-negative and matched arcs tight.
  for (int i = 0; i < nr; ++i) {
    if (s.dist_row[i] < sink_dist) s.p_row[i] += s.dist_row[i] - sink_dist;
  }
  for (int j = 0; j < nc; ++j) {
    if (s.dist_col[j] < sink_dist) s.p_col[j] += s.dist_col[j] - sink_dist;
  }

  for (int j = sink;;) {
    const int i = s.parent_col[j];
    const int prev = s.col4row[i];
    s.col4row[i] = j;
    s.row4col[j] = i;
    if (prev == -1) break;
    j = prev;
  }
  return true;
}

}  // namespace

AssignmentResult solve_assignment(const CostMatrix& costs) {
  const int nr = static_cast<int>(costs.rows());
  const int nc = static_cast<int>(costs.cols());
  for (int i = 0; i < nr; ++i) {
    for (int j = 0; j < nc; ++j) {
      const double c = costs.at(i, j);
      if (c == kForbidden) continue;
      if (!std::isfinite(c) || c < 0.0) {
        std::ostringstream os;
        os << "solve_assignment: entry (" << i << ", " << j
           << ") must be non-negative or the forbidden sentinel";
        throw std::invalid_argument(os.str());
      }
    }
  }

  SspState s;
  s.p_row.assign(nr, 0.0);
  s.p_col.assign(nc, 0.0);
  s.col4row.assign(nr, -1);
  s.row4col.assign(nc, -1);
  s.dist_row.assign(nr, kForbidden);
  s.dist_col.assign(nc, kForbidden);
  s.done_row.assign(nr, 0);
  s.done_col.assign(nc, 0);
  s.parent_col.assign(nc, -1);

  while (augment_once(costs, s)) {
  }

  AssignmentResult out;
  for (int i = 0; i < nr; ++i) {
    if (s.col4row[i] >= 0) {
      out.matches.emplace_back(i, s.col4row[i]);
      out.total_cost += costs.at(i, static_cast<std::size_t>(s.col4row[i]));
    } else {
      out.unmatched_rows.push_back(i);
    }
  }
  for (int j = 0; j < nc; ++j) {
    if (s.row4col[j] < 0) out.unmatched_cols.push_back(j);
  }
  return out;
}

}  // namespace mot
