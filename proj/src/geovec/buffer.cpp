#include "landseg/geovec/buffer.hpp"

#include <cmath>

#include "landseg/error.hpp"

namespace landseg::geo {
namespace {

constexpr double kMiterLimit = 4.0;

struct Vec {
  double x, y;
};

Vec unit_normal(const Point& a, const Point& b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len = std::hypot(dx, dy);
  return {-dy / len, dx / len};
}

// Offset points for one side (sign +1 left, -1 right) of the centerline.
std::vector<Point> offset_side(const std::vector<Point>& path, double half, double sign) {
  std::vector<Point> out;
  const std::size_t n = path.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0 || i == n - 1) {
      const Vec nrm = i == 0 ? unit_normal(path[0], path[1]) : unit_normal(path[n - 2], path[n - 1]);
      out.push_back({path[i].x + sign * half * nrm.x, path[i].y + sign * half * nrm.y});
      continue;
    }
    const Vec n1 = unit_normal(path[i - 1], path[i]);
    const Vec n2 = unit_normal(path[i], path[i + 1]);
    Vec m{n1.x + n2.x, n1.y + n2.y};
    const double mlen = std::hypot(m.x, m.y);
    // Turn direction: positive cross product is a left turn, making the left side inner.
    const double cross = (path[i].x - path[i - 1].x) * (path[i + 1].y - path[i].y) -
                         (path[i].y - path[i - 1].y) * (path[i + 1].x - path[i].x);
    const bool inner = (cross > 0.0) == (sign > 0.0);
    if (mlen > 1e-12) {
      m = {m.x / mlen, m.y / mlen};
      const double cos_half = m.x * n1.x + m.y * n1.y;
      const double ratio = 1.0 / cos_half;
      if (cos_half > 1e-9 && (inner || ratio <= kMiterLimit)) {
        out.push_back({path[i].x + sign * half * ratio * m.x, path[i].y + sign * half * ratio * m.y});
        continue;
      }
    }
    out.push_back({path[i].x + sign * half * n1.x, path[i].y + sign * half * n1.y});
    out.push_back({path[i].x + sign * half * n2.x, path[i].y + sign * half * n2.y});
  }
  return out;
}

}  // namespace

Geometry buffer_polyline(const Geometry& line, double width_m) {
  if (line.kind != GeometryKind::polyline) throw UsageError("buffer_polyline expects a polyline");
  if (!(width_m > 0.0) || !std::isfinite(width_m)) throw UsageError("buffer width must be positive");

  std::vector<Point> path;
  for (const auto& p : line.path) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw UsageError("non-finite coordinate");
    if (path.empty() || !(path.back() == p)) path.push_back(p);
  }
  if (path.size() < 2) throw UsageError("degenerate polyline: fewer than 2 distinct points");

  const double half = width_m * 0.5;
  std::vector<Point> left = offset_side(path, half, 1.0);
  std::vector<Point> right = offset_side(path, half, -1.0);

  Ring ring;
  ring.reserve(left.size() + right.size() + 1);
  ring.insert(ring.end(), right.begin(), right.end());
  ring.insert(ring.end(), left.rbegin(), left.rend());
  ring.push_back(ring.front());

  Geometry out;
  out.kind = GeometryKind::polygon;
  out.polygons.push_back({std::move(ring)});
  return out;
}

}  // namespace landseg::geo
