#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace landseg::geo {

/// Land-cover class id: 0 dense forest, 1 sparse forest, 2 moor,
/// 3 herbaceous formation, 4 building, 5 road; 255 is nodata.
using ClassId = std::uint8_t;
inline constexpr ClassId kNodata = 255;
inline constexpr int kNumClasses = 6;

inline bool is_valid_class(int id) { return (id >= 0 && id < kNumClasses) || id == kNodata; }

/// Projected coordinate in meters.
struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

/// Closed ring: at least 4 points, first == last.
using Ring = std::vector<Point>;
/// Outer ring followed by holes. Interior is decided by the even-odd rule.
using Polygon = std::vector<Ring>;

enum class GeometryKind { polygon, multipolygon, polyline };

const char* to_string(GeometryKind kind);

struct Geometry {
  GeometryKind kind = GeometryKind::polygon;
  std::vector<Polygon> polygons;  // one entry for polygon, any number for multipolygon
  std::vector<Point> path;        // polyline centerline
  double width_m = 0.0;           // polyline only

  friend bool operator==(const Geometry&, const Geometry&) = default;
};

/// Throws UsageError describing the first broken invariant.
void validate(const Geometry& geometry);

struct Feature {
  Geometry geometry;
  std::string source_class;
  std::map<std::string, std::string> attributes;
  std::optional<ClassId> class_id;  // set by apply_class_map

  friend bool operator==(const Feature&, const Feature&) = default;
};

using FeatureCollection = std::vector<Feature>;

/// Shoelace area of a ring (absolute value).
double ring_area(const Ring& ring);
/// Outer area minus hole areas.
double polygon_area(const Polygon& polygon);
double ring_perimeter(const Ring& ring);

}  // namespace landseg::geo
