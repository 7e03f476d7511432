#pragma once

#include <array>

#include "mot/types.hpp"

namespace mot {

// Intersection over union, in [0, 1]; 0 for disjoint boxes.
double iou(const BBox& a, const BBox& b);

// Generalized IoU: iou minus the fraction of the smallest enclosing box not
// covered by the union. In (-1, 1], negative when the boxes are far apart.
double giou(const BBox& a, const BBox& b);

// Center offset normalized by mean height plus log scale ratios:
//   [2(cx_j-cx_i)/(h_j+h_i), 2(cy_j-cy_i)/(h_j+h_i), log(h_j/h_i), log(w_j/w_i)]
// The first two components negate and the last two negate when i and j swap.
std::array<double, 4> relative_geometry(const BBox& i, const BBox& j);

// Gap between the end of one tracklet and the start of the next, in seconds.
// Throws std::invalid_argument unless t_first_b > t_last_a and fps > 0.
double time_difference(int t_last_a, int t_first_b, double fps);

}  // namespace mot
