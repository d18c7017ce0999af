#pragma once

// Planar geometry shared by every stage: points, the ArrayPolygon footprint
// type, and thin wrappers over Boost.Geometry booleans with grid snapping.

#include <span>
#include <string>
#include <vector>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/multi_polygon.hpp>
#include <boost/geometry/geometries/polygon.hpp>
#include <boost/geometry/geometries/register/point.hpp>

namespace pvparam {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }

}  // namespace pvparam

BOOST_GEOMETRY_REGISTER_POINT_2D(pvparam::Point2, double, boost::geometry::cs::cartesian, x, y)

namespace pvparam {

namespace geom {
/// Counterclockwise, closed polygons (holes clockwise).
using Polygon = boost::geometry::model::polygon<Point2, false, true>;
using MultiPolygon = boost::geometry::model::multi_polygon<Polygon>;
using Ring = Polygon::ring_type;
}  // namespace geom

/// Open ring: the closing vertex is not repeated.
using RingPoints = std::vector<Point2>;

/// A planar footprint in projected map coordinates (meters), or in pixel
/// coordinates before georeferencing. Exterior counterclockwise, holes
/// clockwise.
struct ArrayPolygon {
  std::string id;
  RingPoints exterior;
  std::vector<RingPoints> holes;
  double area_m2 = 0.0;
  std::string crs_id;
};

/// Shoelace area, positive for counterclockwise rings.
double signed_ring_area(std::span<const Point2> ring);

/// Sum of ring areas with the hole convention applied; always >= 0 for
/// valid polygons.
double rings_area(const ArrayPolygon& polygon);

/// Reorients rings, drops duplicate/collinear vertices and recomputes
/// area_m2. Throws GeometryError when the exterior has fewer than 3
/// distinct vertices.
void normalize(ArrayPolygon& polygon);

geom::Polygon to_boost(const ArrayPolygon& polygon);
geom::MultiPolygon to_multi(const ArrayPolygon& polygon);
geom::MultiPolygon to_multi(std::span<const ArrayPolygon> polygons);

/// One ArrayPolygon per part, normalized. Parts with area <= min_area are
/// skipped.
std::vector<ArrayPolygon> from_multi(const geom::MultiPolygon& shape, const std::string& crs_id,
                                     double min_area = 0.0);

geom::Polygon make_rectangle(std::span<const Point2, 4> corners);

double area(const geom::MultiPolygon& shape);

/// Rounds every vertex to `grid`, removes repeated and collinear vertices
/// and parts whose area is below grid^2.
void snap(geom::MultiPolygon& shape, double grid);

// Boolean operations. Results are corrected and snapped to `grid`.
geom::MultiPolygon intersection(const geom::MultiPolygon& a, const geom::MultiPolygon& b,
                                double grid = 0.0);
geom::MultiPolygon unite(const geom::MultiPolygon& a, const geom::MultiPolygon& b,
                         double grid = 0.0);
geom::MultiPolygon difference(const geom::MultiPolygon& a, const geom::MultiPolygon& b,
                              double grid = 0.0);

/// Even-odd point-in-polygon over all rings. Points within `tolerance` of
/// any edge count as inside.
bool contains_point(const ArrayPolygon& polygon, Point2 p, double tolerance = 1e-9);
bool contains_point(const geom::MultiPolygon& shape, Point2 p, double tolerance = 1e-9);
/// Same rule over a prepared ring list (see boundary_rings); avoids
/// re-extracting rings when many points are tested against one shape.
bool contains_point(std::span<const RingPoints> rings, Point2 p, double tolerance = 1e-9);

double point_segment_distance(Point2 p, Point2 a, Point2 b);

/// All boundary rings of a shape as open vertex loops.
std::vector<RingPoints> boundary_rings(const geom::MultiPolygon& shape);

struct Box2 {
  Point2 min;
  Point2 max;
};
Box2 bounding_box(const geom::MultiPolygon& shape);
Box2 bounding_box(const ArrayPolygon& polygon);

Point2 centroid(const ArrayPolygon& polygon);

}  // namespace pvparam
