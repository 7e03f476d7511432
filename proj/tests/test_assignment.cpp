#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "mot/assignment.hpp"
#include "mot/rng.hpp"

using namespace mot;

namespace {

// Exhaustive search: best cardinality first, then lowest cost. Small sizes
// only; this is the ground truth the solver is checked against.
struct BruteResult {
  int cardinality = 0;
  double cost = 0.0;
};

void brute_recurse(const CostMatrix& m, std::size_t row,
                   std::vector<char>& used_col, int matched, double cost,
                   BruteResult& best) {
  if (row == m.rows()) {
    if (matched > best.cardinality ||
        (matched == best.cardinality && cost < best.cost)) {
      best.cardinality = matched;
      best.cost = cost;
    }
    return;
  }
  brute_recurse(m, row + 1, used_col, matched, cost, best);  // leave row free
  for (std::size_t c = 0; c < m.cols(); ++c) {
    if (used_col[c] || m.at(row, c) == kForbidden) continue;
    used_col[c] = 1;
    brute_recurse(m, row + 1, used_col, matched + 1, cost + m.at(row, c), best);
    used_col[c] = 0;
  }
}

BruteResult brute_force(const CostMatrix& m) {
  BruteResult best;
  best.cardinality = -1;
  std::vector<char> used(m.cols(), 0);
  brute_recurse(m, 0, used, 0, 0.0, best);
  return best;
}

void check_result_structure(const CostMatrix& m, const AssignmentResult& r) {
  std::vector<char> row_used(m.rows(), 0), col_used(m.cols(), 0);
  double total = 0.0;
  int prev_row = -1;
  for (const auto& [row, col] : r.matches) {
    CHECK(row > prev_row);  // ascending, hence unique
    prev_row = row;
    REQUIRE(row >= 0);
    REQUIRE(col >= 0);
    REQUIRE(static_cast<std::size_t>(row) < m.rows());
    REQUIRE(static_cast<std::size_t>(col) < m.cols());
    CHECK(!col_used[static_cast<std::size_t>(col)]);
    row_used[static_cast<std::size_t>(row)] = 1;
    col_used[static_cast<std::size_t>(col)] = 1;
    CHECK(m.at(static_cast<std::size_t>(row), static_cast<std::size_t>(col)) !=
          kForbidden);
    total += m.at(static_cast<std::size_t>(row), static_cast<std::size_t>(col));
  }
  CHECK(r.total_cost == doctest::Approx(total).epsilon(1e-12));
  std::size_t free_rows = 0, free_cols = 0;
  for (char u : row_used) free_rows += u == 0;
  for (char u : col_used) free_cols += u == 0;
  CHECK(r.unmatched_rows.size() == free_rows);
  CHECK(r.unmatched_cols.size() == free_cols);
  for (int row : r.unmatched_rows) CHECK(!row_used[static_cast<std::size_t>(row)]);
  for (int col : r.unmatched_cols) CHECK(!col_used[static_cast<std::size_t>(col)]);
  CHECK(std::is_sorted(r.unmatched_rows.begin(), r.unmatched_rows.end()));
  CHECK(std::is_sorted(r.unmatched_cols.begin(), r.unmatched_cols.end()));
}

}  // namespace

TEST_CASE("hand-checked matrices") {
  SUBCASE("prefers the cheaper pairing") {
    CostMatrix m(2, 2);
    m.at(0, 0) = 1;
    m.at(0, 1) = 2;
    m.at(1, 0) = 2;
    m.at(1, 1) = 4;
    const auto r = solve_assignment(m);
    REQUIRE(r.matches.size() == 2);
    CHECK(r.total_cost == doctest::Approx(4.0));  // (0,1) + (1,0)
    CHECK(r.matches[0] == std::pair<int, int>{0, 1});
    CHECK(r.matches[1] == std::pair<int, int>{1, 0});
  }

  SUBCASE("an expensive row cannot steal the only column") {
    CostMatrix m(2, 1);
    m.at(0, 0) = 5;
    m.at(1, 0) = 1;
    const auto r = solve_assignment(m);
    REQUIRE(r.matches.size() == 1);
    CHECK(r.matches[0] == std::pair<int, int>{1, 0});
    CHECK(r.total_cost == doctest::Approx(1.0));
    CHECK(r.unmatched_rows == std::vector<int>{0});
  }

  SUBCASE("cardinality beats cost") {
    // Matching both rows costs 100 + 1; matching only row 0 cheaply costs 1.
    CostMatrix m(2, 2);
    m.at(0, 0) = 1;
    m.at(0, 1) = 100;
    m.at(1, 0) = 1;  // row 1 can only take column 0
    const auto r = solve_assignment(m);
    REQUIRE(r.matches.size() == 2);
    CHECK(r.total_cost == doctest::Approx(101.0));
  }

  SUBCASE("all forbidden yields no matches") {
    CostMatrix m(3, 2);
    const auto r = solve_assignment(m);
    CHECK(r.matches.empty());
    CHECK(r.unmatched_rows.size() == 3);
    CHECK(r.unmatched_cols.size() == 2);
    CHECK(r.total_cost == 0.0);
  }

  SUBCASE("empty dimensions") {
    CHECK(solve_assignment(CostMatrix(0, 5)).matches.empty());
    CHECK(solve_assignment(CostMatrix(4, 0)).unmatched_rows.size() == 4);
  }
}

TEST_CASE("invalid entries are rejected by name") {
  CostMatrix m(1, 1);
  m.at(0, 0) = -0.5;
  CHECK_THROWS_AS(solve_assignment(m), std::invalid_argument);
  m.at(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(solve_assignment(m), std::invalid_argument);
}

TEST_CASE("matches the exhaustive oracle on random matrices") {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t rows = static_cast<std::size_t>(rng.uniform_int(1, 7));
    const std::size_t cols = static_cast<std::size_t>(rng.uniform_int(1, 7));
    CostMatrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c)
        if (rng.uniform01() >= 0.3) m.at(r, c) = rng.uniform(0.0, 10.0);

    const auto got = solve_assignment(m);
    check_result_structure(m, got);
    const auto want = brute_force(m);
    CHECK(static_cast<int>(got.matches.size()) == want.cardinality);
    CHECK(got.total_cost ==
          doctest::Approx(want.cost).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("integer costs solve exactly") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = static_cast<std::size_t>(rng.uniform_int(2, 6));
    CostMatrix m(n, n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c)
        m.at(r, c) = rng.uniform_int(0, 20);
    const auto got = solve_assignment(m);
    const auto want = brute_force(m);
    CHECK(got.matches.size() == n);
    CHECK(got.total_cost == want.cost);  // all-integer arithmetic, exact
  }
}
