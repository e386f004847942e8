#pragma once

#include "landseg/geovec/geometry.hpp"

namespace landseg::geo {

/// Offsets a polyline centerline by width_m / 2 on each side with flat end caps
/// and mitred joins (bevelled past a miter ratio of 4). Returns a polygon with a
/// single closed ring. Throws UsageError for fewer than 2 distinct points or a
/// non-positive width.
Geometry buffer_polyline(const Geometry& line, double width_m);

}  // namespace landseg::geo
