#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "mot/geometry.hpp"
#include "mot/rng.hpp"

using namespace mot;

namespace {

// Independent IoU: rectangle intersection from scratch.
double iou_oracle(const BBox& a, const BBox& b) {
  const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = ix * iy;
  return inter / (a.area() + b.area() - inter);
}

BBox random_box(Rng& rng) {
  return BBox{rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(0.5, 40),
              rng.uniform(0.5, 40)};
}

}  // namespace

TEST_CASE("iou on hand-checked boxes") {
  const BBox a{0, 0, 10, 10};
  CHECK(iou(a, a) == doctest::Approx(1.0));
  // quarter overlap: inter 25, union 175
  CHECK(iou(a, BBox{5, 5, 10, 10}) == doctest::Approx(25.0 / 175.0));
  CHECK(iou(a, BBox{10, 0, 10, 10}) == doctest::Approx(0.0));  // touching edge
  CHECK(iou(a, BBox{30, 30, 5, 5}) == doctest::Approx(0.0));
  CHECK_THROWS_AS(iou(a, BBox{0, 0, -2, 5}), std::invalid_argument);
}

TEST_CASE("giou matches hand computation and bounds") {
  const BBox a{0, 0, 10, 10};
  CHECK(giou(a, a) == doctest::Approx(1.0));
  // Disjoint, hull 30x10=300, union 200: 0 - 100/300 = -1/3.
  CHECK(giou(a, BBox{20, 0, 10, 10}) == doctest::Approx(-1.0 / 3.0));

  Rng rng(7);
  for (int i = 0; i < 500; ++i) {
    const BBox p = random_box(rng), q = random_box(rng);
    const double g = giou(p, q);
    CHECK(g <= iou(p, q) + 1e-12);
    CHECK(g >= -1.0);
    CHECK(g <= 1.0);
    CHECK(giou(q, p) == doctest::Approx(g));  // symmetric
    CHECK(iou(p, q) == doctest::Approx(iou_oracle(p, q)));
  }
}

TEST_CASE("relative geometry pinned example") {
  // Same size (w=1, h=2); the second center sits 2 right and 1 down.
  const BBox bi{-0.5, -1.0, 1.0, 2.0};
  const BBox bj{1.5, 0.0, 1.0, 2.0};
  const auto f = relative_geometry(bi, bj);
  CHECK(f[0] == doctest::Approx(1.0));
  CHECK(f[1] == doctest::Approx(0.5));
  CHECK(f[2] == doctest::Approx(0.0));
  CHECK(f[3] == doctest::Approx(0.0));
}

TEST_CASE("relative geometry antisymmetry and scale terms") {
  Rng rng(13);
  for (int i = 0; i < 200; ++i) {
    const BBox p = random_box(rng), q = random_box(rng);
    const auto fwd = relative_geometry(p, q);
    const auto rev = relative_geometry(q, p);
    CHECK(fwd[0] == doctest::Approx(-rev[0]));
    CHECK(fwd[1] == doctest::Approx(-rev[1]));
    CHECK(fwd[2] == doctest::Approx(-rev[2]));
    CHECK(fwd[3] == doctest::Approx(-rev[3]));
    CHECK(fwd[2] == doctest::Approx(std::log(q.h / p.h)));
    CHECK(fwd[3] == doctest::Approx(std::log(q.w / p.w)));
    // Oracle for the offset normalization.
    CHECK(fwd[0] == doctest::Approx(2.0 * (q.cx() - p.cx()) / (q.h + p.h)));
    CHECK(fwd[1] == doctest::Approx(2.0 * (q.cy() - p.cy()) / (q.h + p.h)));
  }
}

TEST_CASE("time difference in seconds") {
  CHECK(time_difference(10, 60, 25.0) == doctest::Approx(2.0));  // 50 frames at 25 fps
  CHECK(time_difference(1, 2, 30.0) == doctest::Approx(1.0 / 30.0));
  CHECK_THROWS_AS(time_difference(5, 5, 25.0), std::invalid_argument);
  CHECK_THROWS_AS(time_difference(6, 5, 25.0), std::invalid_argument);
  CHECK_THROWS_AS(time_difference(1, 2, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(time_difference(1, 2, -1.0), std::invalid_argument);
}
