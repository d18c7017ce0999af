#pragma once

// Binary PV masks to georeferenced footprint polygons: connected components,
// minimal-area bounding rectangles and the alternating add/subtract
// rectangle refinement.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pvparam/geometry.hpp"

namespace pvparam {

/// Six-parameter affine map from pixel-center coordinates (col, row) to map
/// coordinates, stored in ESRI world-file order A, D, B, E, C, F:
///   x = A*col + B*row + C
///   y = D*col + E*row + F
/// (C, F) is therefore the map position of the center of pixel (0, 0).
struct AffineTransform {
  double a = 1.0;
  double d = 0.0;
  double b = 0.0;
  double e = 1.0;
  double c = 0.0;
  double f = 0.0;

  double determinant() const { return a * e - b * d; }
  Point2 apply(Point2 pixel) const { return {a * pixel.x + b * pixel.y + c, d * pixel.x + e * pixel.y + f}; }
  /// Inverse map. Throws InvalidArgument when the transform is singular.
  Point2 invert(Point2 map) const;
};

struct GeoreferencedMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;  // row-major, 1 = PV
  AffineTransform transform;
  std::string crs_id;

  bool at(int row, int col) const { return bits[static_cast<std::size_t>(row) * width + col] != 0; }
  /// Throws InvalidArgument when the size or transform invariants fail.
  void validate() const;
};

struct Pixel {
  int row = 0;
  int col = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

struct PixelComponent {
  int id = 0;
  std::vector<Pixel> pixels;  // sorted by (row, col)
};

enum class Connectivity { four, eight };

/// Rectangle in the plane. half_long >= half_short > 0; `angle` is the
/// direction of the long axis in [0, pi).
struct OrientedRectangle {
  Point2 center;
  double half_long = 0.0;
  double half_short = 0.0;
  double angle = 0.0;

  double area() const { return 4.0 * half_long * half_short; }
  Point2 long_axis() const;
  Point2 short_axis() const;
  /// Counterclockwise corners.
  std::array<Point2, 4> corners() const;
};

struct RefineParams {
  int max_depth = 4;
  double stop_ratio = 0.02;
  int min_mismatch_px = 4;
  int min_component_px = 4;
  double min_area_m2 = 1.2;
  double min_extent_m = 0.05;
  Connectivity connectivity = Connectivity::eight;
  double snap_grid_px = 1e-6;
  /// Sub-samples per pixel side used to measure how well a piece agrees
  /// with the mask when deciding whether to keep it.
  int coverage_subsamples = 4;
  /// Radius of the square opening applied to the component before its
  /// bounding rectangle is taken and to mismatch pixels before they are
  /// grouped; 0 disables both.
  int mismatch_opening_px = 1;
};

/// Reads an 8-bit PGM (P5) or 8-bit grayscale PNG plus its world file.
GeoreferencedMask load_georeferenced_mask(const std::filesystem::path& image_path,
                                          const std::filesystem::path& worldfile_path, int threshold,
                                          std::string crs_id = {});

/// Parses the six numeric lines of an ESRI world file.
AffineTransform read_world_file(const std::filesystem::path& path);
void write_world_file(const std::filesystem::path& path, const AffineTransform& transform);

/// Connected groups of PV pixels, ordered by (min row, min col). Groups with
/// fewer than `min_component_px` pixels are dropped.
std::vector<PixelComponent> extract_components(const GeoreferencedMask& mask,
                                               Connectivity connectivity = Connectivity::eight,
                                               int min_component_px = 4);

/// Andrew's monotone chain. Counterclockwise, no collinear vertices.
std::vector<Point2> convex_hull(std::span<const Point2> points);

/// Minimal-area enclosing rectangle by rotating calipers over the convex
/// hull. Degenerate inputs get half extents clamped to `min_extent`.
OrientedRectangle minimal_area_rectangle(std::span<const Point2> points, double min_extent = 0.05);

struct RefinedComponent {
  /// Pixel-edge coordinates: pixel (r, c) covers [c, c+1] x [r, r+1].
  std::vector<ArrayPolygon> parts;
  geom::MultiPolygon shape;
  OrientedRectangle initial_rectangle;
  int depth_reached = 0;
  bool fallback = false;
  std::string warning;
};

RefinedComponent refine_component_polygon(const PixelComponent& component, const RefineParams& params);

/// extract_components -> refine_component_polygon -> georeferencing. Parts
/// smaller than params.min_area_m2 are dropped; ids are "pv_0001", ... in
/// component order.
std::vector<ArrayPolygon> vectorize_mask(const GeoreferencedMask& mask, const RefineParams& params);

/// Maps a pixel-edge coordinate to map coordinates (pixel centers sit at
/// half-integer pixel-edge coordinates).
Point2 pixel_edge_to_map(const AffineTransform& transform, Point2 edge);

}  // namespace pvparam
