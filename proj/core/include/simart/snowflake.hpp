#pragma once

#include "simart/geometry.hpp"

namespace simart {

// Canonical snowflake region: the classical triadic bump construction applied
// to an equilateral triangle, truncated at a finite recursion depth. The frame
// is normalized so the region has diameter exactly 1: centroid at the origin,
// one vertex straight up, circumradius 1/2. Every point of the region lies in
// the closed ball of radius 1/2 around the origin, and antipodal boundary
// points realize the diameter, so the region plays the same role as the
// diameter-1 ball in covering computations.

inline constexpr double snowflake_circumradius = 0.5;
inline constexpr int default_snowflake_depth = 8;

// Membership in the depth-q region (closed set).
bool snowflake_contains(const VecD& x, int depth);

// Euclidean distance to the depth-q region, 0 for points inside.
double snowflake_distance(const VecD& x, int depth);

// Area of the depth-q region, by the closed-form series.
double snowflake_area(int depth);

// Tight axis-aligned bounding box of the region (any depth >= 1).
Box snowflake_bounding_box();

}  // namespace simart
