#include "pvparam/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pvparam/error.hpp"

namespace bg = boost::geometry;

namespace pvparam {

namespace {

// Removes repeated vertices and vertices lying within `tol` of the line
// through their neighbours. Works on open rings.
RingPoints clean_ring(RingPoints ring, double tol) {
  if (ring.size() > 1 && ring.front() == ring.back()) ring.pop_back();
  bool changed = true;
  while (changed && ring.size() >= 3) {
    changed = false;
    RingPoints out;
    out.reserve(ring.size());
    const std::size_t n = ring.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point2 prev = out.empty() ? ring[(i + n - 1) % n] : out.back();
      const Point2 cur = ring[i];
      const Point2 next = ring[(i + 1) % n];
      if (cur == prev) {
        changed = true;
        continue;
      }
      const double base = std::hypot(next.x - prev.x, next.y - prev.y);
      const double dist = base > 0.0 ? std::abs(cross(cur - prev, next - prev)) / base
                                     : std::hypot(cur.x - prev.x, cur.y - prev.y);
      if (dist <= tol) {
        changed = true;
        continue;
      }
      out.push_back(cur);
    }
    // The wrap-around vertex may have been judged against a vertex that was
    // later removed; iterate until stable.
    ring = std::move(out);
  }
  if (ring.size() < 3) ring.clear();
  return ring;
}

double collinear_tolerance(double grid) { return grid > 0.0 ? 0.5 * grid : 1e-12; }

RingPoints open_ring(const geom::Ring& ring) {
  RingPoints out(ring.begin(), ring.end());
  if (out.size() > 1 && out.front() == out.back()) out.pop_back();
  return out;
}

geom::Ring closed_ring(const RingPoints& ring) {
  geom::Ring out(ring.begin(), ring.end());
  if (!ring.empty()) out.push_back(ring.front());
  return out;
}

double snap_value(double v, double grid) { return grid > 0.0 ? std::round(v / grid) * grid : v; }

}  // namespace

double signed_ring_area(std::span<const Point2> ring) {
  const std::size_t n = ring.size();
  if (n < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& a = ring[i];
    const Point2& b = ring[(i + 1) % n];
    twice += a.x * b.y - b.x * a.y;
  }
  return 0.5 * twice;
}

double rings_area(const ArrayPolygon& polygon) {
  double total = std::abs(signed_ring_area(polygon.exterior));
  for (const auto& hole : polygon.holes) total -= std::abs(signed_ring_area(hole));
  return total;
}

void normalize(ArrayPolygon& polygon) {
  polygon.exterior = clean_ring(std::move(polygon.exterior), 1e-12);
  if (polygon.exterior.size() < 3) throw GeometryError("polygon '" + polygon.id + "' has a degenerate exterior ring");
  if (signed_ring_area(polygon.exterior) < 0.0) std::reverse(polygon.exterior.begin(), polygon.exterior.end());
  std::vector<RingPoints> holes;
  for (auto& hole : polygon.holes) {
    RingPoints h = clean_ring(std::move(hole), 1e-12);
    if (h.size() < 3) continue;
    if (signed_ring_area(h) > 0.0) std::reverse(h.begin(), h.end());
    holes.push_back(std::move(h));
  }
  polygon.holes = std::move(holes);
  polygon.area_m2 = rings_area(polygon);
}

geom::Polygon to_boost(const ArrayPolygon& polygon) {
  geom::Polygon out;
  out.outer() = closed_ring(polygon.exterior);
  for (const auto& hole : polygon.holes) out.inners().push_back(closed_ring(hole));
  bg::correct(out);
  return out;
}

geom::MultiPolygon to_multi(const ArrayPolygon& polygon) {
  geom::MultiPolygon out;
  if (polygon.exterior.size() >= 3) out.push_back(to_boost(polygon));
  return out;
}

geom::MultiPolygon to_multi(std::span<const ArrayPolygon> polygons) {
  geom::MultiPolygon out;
  for (const auto& p : polygons) {
    if (p.exterior.size() < 3) continue;
    out = out.empty() ? to_multi(p) : unite(out, to_multi(p));
  }
  return out;
}

std::vector<ArrayPolygon> from_multi(const geom::MultiPolygon& shape, const std::string& crs_id,
                                     double min_area) {
  std::vector<ArrayPolygon> out;
  for (const auto& poly : shape) {
    ArrayPolygon p;
    p.crs_id = crs_id;
    p.exterior = open_ring(poly.outer());
    for (const auto& inner : poly.inners()) p.holes.push_back(open_ring(inner));
    try {
      normalize(p);
    } catch (const GeometryError&) {
      continue;
    }
    if (p.area_m2 <= min_area) continue;
    out.push_back(std::move(p));
  }
  return out;
}

geom::Polygon make_rectangle(std::span<const Point2, 4> corners) {
  geom::Polygon out;
  for (const auto& c : corners) out.outer().push_back(c);
  out.outer().push_back(corners[0]);
  bg::correct(out);
  return out;
}

double area(const geom::MultiPolygon& shape) { return shape.empty() ? 0.0 : bg::area(shape); }

void snap(geom::MultiPolygon& shape, double grid) {
  const double tol = collinear_tolerance(grid);
  const double min_ring_area = grid > 0.0 ? grid * grid : 0.0;
  geom::MultiPolygon out;
  for (const auto& poly : shape) {
    auto snap_ring = [&](const geom::Ring& ring) {
      RingPoints pts = open_ring(ring);
      for (auto& p : pts) p = {snap_value(p.x, grid), snap_value(p.y, grid)};
      pts = clean_ring(std::move(pts), tol);
      if (std::abs(signed_ring_area(pts)) <= min_ring_area) pts.clear();
      return pts;
    };
    RingPoints outer = snap_ring(poly.outer());
    if (outer.empty()) continue;
    geom::Polygon p;
    p.outer() = closed_ring(outer);
    for (const auto& inner : poly.inners()) {
      RingPoints h = snap_ring(inner);
      if (!h.empty()) p.inners().push_back(closed_ring(h));
    }
    bg::correct(p);
    out.push_back(std::move(p));
  }
  shape = std::move(out);
}

geom::MultiPolygon intersection(const geom::MultiPolygon& a, const geom::MultiPolygon& b, double grid) {
  geom::MultiPolygon out;
  if (a.empty() || b.empty()) return out;
  bg::intersection(a, b, out);
  bg::correct(out);
  snap(out, grid);
  return out;
}

geom::MultiPolygon unite(const geom::MultiPolygon& a, const geom::MultiPolygon& b, double grid) {
  geom::MultiPolygon out;
  if (a.empty()) {
    out = b;
  } else if (b.empty()) {
    out = a;
  } else {
    bg::union_(a, b, out);
  }
  bg::correct(out);
  snap(out, grid);
  return out;
}

geom::MultiPolygon difference(const geom::MultiPolygon& a, const geom::MultiPolygon& b, double grid) {
  geom::MultiPolygon out;
  if (a.empty()) return out;
  if (b.empty()) {
    out = a;
  } else {
    bg::difference(a, b, out);
  }
  bg::correct(out);
  snap(out, grid);
  return out;
}

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const Point2 q = a + t * ab;
  return std::hypot(p.x - q.x, p.y - q.y);
}

namespace {

bool even_odd_contains(std::span<const RingPoints> rings, Point2 p, double tolerance) {
  bool inside = false;
  for (const auto& ring : rings) {
    const std::size_t n = ring.size();
    if (n < 2) continue;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const Point2& a = ring[i];
      const Point2& b = ring[j];
      if (point_segment_distance(p, a, b) <= tolerance) return true;
      if ((a.y > p.y) != (b.y > p.y)) {
        const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
        if (p.x < x) inside = !inside;
      }
    }
  }
  return inside;
}

}  // namespace

bool contains_point(const ArrayPolygon& polygon, Point2 p, double tolerance) {
  std::vector<const RingPoints*> rings{&polygon.exterior};
  for (const auto& h : polygon.holes) rings.push_back(&h);
  bool inside = false;
  for (const RingPoints* ring : rings) {
    const std::size_t n = ring->size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const Point2& a = (*ring)[i];
      const Point2& b = (*ring)[j];
      if (point_segment_distance(p, a, b) <= tolerance) return true;
      if ((a.y > p.y) != (b.y > p.y)) {
        const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
        if (p.x < x) inside = !inside;
      }
    }
  }
  return inside;
}

bool contains_point(const geom::MultiPolygon& shape, Point2 p, double tolerance) {
  // Parts of a valid multipolygon are disjoint, so even-odd over every ring
  // is equivalent to testing each part.
  const auto rings = boundary_rings(shape);
  return even_odd_contains(rings, p, tolerance);
}

bool contains_point(std::span<const RingPoints> rings, Point2 p, double tolerance) {
  return even_odd_contains(rings, p, tolerance);
}

std::vector<RingPoints> boundary_rings(const geom::MultiPolygon& shape) {
  std::vector<RingPoints> rings;
  for (const auto& poly : shape) {
    rings.push_back(open_ring(poly.outer()));
    for (const auto& inner : poly.inners()) rings.push_back(open_ring(inner));
  }
  return rings;
}

Box2 bounding_box(const geom::MultiPolygon& shape) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  Box2 box{{inf, inf}, {-inf, -inf}};
  for (const auto& poly : shape) {
    for (const auto& p : poly.outer()) {
      box.min = {std::min(box.min.x, p.x), std::min(box.min.y, p.y)};
      box.max = {std::max(box.max.x, p.x), std::max(box.max.y, p.y)};
    }
  }
  return box;
}

Box2 bounding_box(const ArrayPolygon& polygon) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  Box2 box{{inf, inf}, {-inf, -inf}};
  for (const auto& p : polygon.exterior) {
    box.min = {std::min(box.min.x, p.x), std::min(box.min.y, p.y)};
    box.max = {std::max(box.max.x, p.x), std::max(box.max.y, p.y)};
  }
  return box;
}

Point2 centroid(const ArrayPolygon& polygon) {
  Point2 c;
  bg::centroid(to_boost(polygon), c);
  return c;
}

}  // namespace pvparam
