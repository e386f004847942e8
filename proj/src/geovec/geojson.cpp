#include "landseg/geovec/geojson.hpp"

#include <cmath>

#include "json.hpp"

namespace landseg::geo {

using nlohmann::json;

GeoJsonError::GeoJsonError(int feature_index, const std::string& what)
    : DataError(feature_index < 0 ? what : "feature " + std::to_string(feature_index) + ": " + what),
      feature_index_(feature_index) {}

namespace {

Point parse_position(const json& j, int index) {
  if (!j.is_array() || j.size() < 2 || !j[0].is_number() || !j[1].is_number()) {
    throw GeoJsonError(index, "position must be an array of at least two numbers");
  }
  Point p{j[0].get<double>(), j[1].get<double>()};
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw GeoJsonError(index, "non-finite coordinate");
  return p;
}

std::vector<Point> parse_positions(const json& j, int index) {
  if (!j.is_array()) throw GeoJsonError(index, "expected an array of positions");
  std::vector<Point> points;
  points.reserve(j.size());
  for (const auto& pos : j) points.push_back(parse_position(pos, index));
  return points;
}

Polygon parse_polygon(const json& j, int index) {
  if (!j.is_array() || j.empty()) throw GeoJsonError(index, "polygon needs at least one ring");
  Polygon poly;
  for (const auto& ring_json : j) {
    Ring ring = parse_positions(ring_json, index);
    if (ring.size() < 4) throw GeoJsonError(index, "ring has fewer than 4 points");
    if (!(ring.front() == ring.back())) throw GeoJsonError(index, "unclosed ring");
    poly.push_back(std::move(ring));
  }
  return poly;
}

std::string property_string(const json& value) {
  return value.is_string() ? value.get<std::string>() : value.dump();
}

json position_json(const Point& p) { return json::array({p.x, p.y}); }

json positions_json(const std::vector<Point>& points) {
  json out = json::array();
  for (const auto& p : points) out.push_back(position_json(p));
  return out;
}

json polygon_json(const Polygon& poly) {
  json out = json::array();
  for (const auto& ring : poly) out.push_back(positions_json(ring));
  return out;
}

}  // namespace

FeatureCollection parse_feature_collection(std::string_view text, const GeoJsonOptions& options) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw GeoJsonError(-1, std::string("malformed document: ") + e.what());
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" || !doc.contains("features") ||
      !doc["features"].is_array()) {
    throw GeoJsonError(-1, "malformed document: expected a FeatureCollection with a features array");
  }

  FeatureCollection out;
  int index = 0;
  for (const auto& fj : doc["features"]) {
    if (!fj.is_object() || fj.value("type", "") != "Feature") throw GeoJsonError(index, "not a Feature object");
    if (!fj.contains("geometry") || !fj["geometry"].is_object()) throw GeoJsonError(index, "missing geometry");
    const json& gj = fj["geometry"];
    const std::string type = gj.value("type", "");
    if (!gj.contains("coordinates")) throw GeoJsonError(index, "geometry without coordinates");
    const json& coords = gj["coordinates"];

    Feature feature;
    if (fj.contains("properties") && fj["properties"].is_object()) {
      for (const auto& [key, value] : fj["properties"].items()) {
        if (value.is_null()) continue;
        feature.attributes[key] = property_string(value);
      }
    }
    auto cls = feature.attributes.find(options.class_property);
    if (cls == feature.attributes.end() || cls->second.empty()) {
      throw GeoJsonError(index, "missing source class property '" + options.class_property + "'");
    }
    feature.source_class = cls->second;
    feature.attributes.erase(cls);

    if (type == "Polygon") {
      feature.geometry.kind = GeometryKind::polygon;
      feature.geometry.polygons.push_back(parse_polygon(coords, index));
    } else if (type == "MultiPolygon") {
      feature.geometry.kind = GeometryKind::multipolygon;
      if (!coords.is_array() || coords.empty()) throw GeoJsonError(index, "empty multipolygon");
      for (const auto& pj : coords) feature.geometry.polygons.push_back(parse_polygon(pj, index));
    } else if (type == "LineString") {
      feature.geometry.kind = GeometryKind::polyline;
      feature.geometry.path = parse_positions(coords, index);
      if (feature.geometry.path.size() < 2) throw GeoJsonError(index, "linestring has fewer than 2 points");
      feature.geometry.width_m = options.default_width_m;
      const json& props = fj.contains("properties") ? fj["properties"] : json::object();
      if (props.is_object() && props.contains(options.width_property)) {
        const json& w = props[options.width_property];
        if (!w.is_number()) throw GeoJsonError(index, "width must be numeric");
        feature.geometry.width_m = w.get<double>();
      }
      if (!(feature.geometry.width_m > 0.0) || !std::isfinite(feature.geometry.width_m)) {
        throw GeoJsonError(index, "polyline width must be positive");
      }
    } else {
      throw GeoJsonError(index, "unsupported geometry kind '" + type + "'");
    }
    out.push_back(std::move(feature));
    ++index;
  }
  return out;
}

std::string to_geojson(const FeatureCollection& features, const GeoJsonOptions& options) {
  json doc = {{"type", "FeatureCollection"}, {"features", json::array()}};
  for (const auto& f : features) {
    json props = json::object();
    for (const auto& [key, value] : f.attributes) props[key] = value;
    props[options.class_property] = f.source_class;
    json geom;
    switch (f.geometry.kind) {
      case GeometryKind::polygon:
        geom = {{"type", "Polygon"}, {"coordinates", polygon_json(f.geometry.polygons.at(0))}};
        break;
      case GeometryKind::multipolygon: {
        json polys = json::array();
        for (const auto& poly : f.geometry.polygons) polys.push_back(polygon_json(poly));
        geom = {{"type", "MultiPolygon"}, {"coordinates", polys}};
        break;
      }
      case GeometryKind::polyline:
        geom = {{"type", "LineString"}, {"coordinates", positions_json(f.geometry.path)}};
        props[options.width_property] = f.geometry.width_m;
        break;
    }
    doc["features"].push_back({{"type", "Feature"}, {"properties", props}, {"geometry", geom}});
  }
  return doc.dump();
}

}  // namespace landseg::geo
