#include "mot/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mot {

namespace {

double intersection_area(const BBox& a, const BBox& b) {
  const double x1 = std::max(a.x, b.x);
  const double y1 = std::max(a.y, b.y);
  const double x2 = std::min(a.x + a.w, b.x + b.w);
  const double y2 = std::min(a.y + a.h, b.y + b.h);
  if (x2 <= x1 || y2 <= y1) return 0.0;
  return (x2 - x1) * (y2 - y1);
}

void require_valid(const BBox& a, const BBox& b, const char* fn) {
  if (!a.valid() || !b.valid()) {
    std::ostringstream os;
    os << fn << ": boxes must be finite with positive width and height";
    throw std::invalid_argument(os.str());
  }
}

}  // namespace

double iou(const BBox& a, const BBox& b) {
  require_valid(a, b, "iou");
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  return inter / uni;
}

double giou(const BBox& a, const BBox& b) {
  require_valid(a, b, "giou");
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  const double hx1 = std::min(a.x, b.x);
  const double hy1 = std::min(a.y, b.y);
  const double hx2 = std::max(a.x + a.w, b.x + b.w);
  const double hy2 = std::max(a.y + a.h, b.y + b.h);
  const double hull = (hx2 - hx1) * (hy2 - hy1);
  return inter / uni - (hull - uni) / hull;
}

std::array<double, 4> relative_geometry(const BBox& i, const BBox& j) {
  require_valid(i, j, "relative_geometry");
  const double mean_h2 = i.h + j.h;
  return {2.0 * (j.cx() - i.cx()) / mean_h2, 2.0 * (j.cy() - i.cy()) / mean_h2,
          std::log(j.h / i.h), std::log(j.w / i.w)};
}

double time_difference(int t_last_a, int t_first_b, double fps) {
  if (t_first_b <= t_last_a) {
    std::ostringstream os;
    os << "time_difference: second tracklet must start after the first ends, got end "
       << t_last_a << " and start " << t_first_b;
    throw std::invalid_argument(os.str());
  }
  if (!(fps > 0.0) || !std::isfinite(fps)) {
    throw std::invalid_argument("time_difference: fps must be positive and finite");
  }
  return static_cast<double>(t_first_b - t_last_a) / fps;
}

}  // namespace mot
