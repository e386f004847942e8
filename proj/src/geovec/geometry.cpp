#include "landseg/geovec/geometry.hpp"

#include <cmath>

#include "landseg/error.hpp"

namespace landseg::geo {

const char* to_string(GeometryKind kind) {
  switch (kind) {
    case GeometryKind::polygon:
      return "polygon";
    case GeometryKind::multipolygon:
      return "multipolygon";
    case GeometryKind::polyline:
      return "polyline";
  }
  return "unknown";
}

namespace {

void validate_point(const Point& p) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw UsageError("non-finite coordinate");
}

void validate_ring(const Ring& ring) {
  if (ring.size() < 4) throw UsageError("ring has fewer than 4 points");
  if (!(ring.front() == ring.back())) throw UsageError("ring is not closed");
  for (const auto& p : ring) validate_point(p);
}

}  // namespace

void validate(const Geometry& geometry) {
  switch (geometry.kind) {
    case GeometryKind::polygon:
    case GeometryKind::multipolygon:
      if (geometry.polygons.empty()) throw UsageError("polygon geometry without rings");
      if (geometry.kind == GeometryKind::polygon && geometry.polygons.size() != 1) {
        throw UsageError("polygon geometry must hold exactly one polygon");
      }
      for (const auto& poly : geometry.polygons) {
        if (poly.empty()) throw UsageError("polygon without rings");
        for (const auto& ring : poly) validate_ring(ring);
      }
      break;
    case GeometryKind::polyline:
      if (geometry.path.size() < 2) throw UsageError("polyline has fewer than 2 points");
      for (const auto& p : geometry.path) validate_point(p);
      if (!(geometry.width_m > 0.0) || !std::isfinite(geometry.width_m)) {
        throw UsageError("polyline width must be positive");
      }
      break;
  }
}

double ring_area(const Ring& ring) {
  double twice = 0.0;
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    twice += ring[i].x * ring[i + 1].y - ring[i + 1].x * ring[i].y;
  }
  return std::abs(twice) * 0.5;
}

double polygon_area(const Polygon& polygon) {
  double area = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    area += (i == 0 ? 1.0 : -1.0) * ring_area(polygon[i]);
  }
  return area;
}

double ring_perimeter(const Ring& ring) {
  double length = 0.0;
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    length += std::hypot(ring[i + 1].x - ring[i].x, ring[i + 1].y - ring[i].y);
  }
  return length;
}

}  // namespace landseg::geo
