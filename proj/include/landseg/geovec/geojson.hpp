#pragma once

#include <string>
#include <string_view>

#include "landseg/error.hpp"
#include "landseg/geovec/geometry.hpp"

namespace landseg::geo {

/// Parse failure. feature_index() is -1 for document-level problems.
class GeoJsonError : public DataError {
 public:
  GeoJsonError(int feature_index, const std::string& what);
  int feature_index() const { return feature_index_; }

 private:
  int feature_index_;
};

struct GeoJsonOptions {
  /// Property holding the source class string.
  std::string class_property = "class";
  /// Property holding a polyline's rendered width in meters.
  std::string width_property = "width_m";
  double default_width_m = 4.0;
};

/// Parses a GeoJSON FeatureCollection restricted to Polygon, MultiPolygon and
/// LineString geometries. Feature order is preserved.
FeatureCollection parse_feature_collection(std::string_view text, const GeoJsonOptions& options = {});

/// Serializes back to GeoJSON. Coordinates are written with round-trip precision.
std::string to_geojson(const FeatureCollection& features, const GeoJsonOptions& options = {});

}  // namespace landseg::geo
