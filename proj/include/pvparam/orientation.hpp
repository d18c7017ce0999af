#pragma once

// Tilt and azimuth of PV arrays from point clouds clipped by their
// footprints: RANSAC consensus followed by a total-least-squares refit.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pvparam/geometry.hpp"

namespace pvparam {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct PointSet {
  std::vector<Point3> points;
  std::string crs_id;
};

enum class FitMethod { least_squares, ransac_refit, fallback };

/// Plane normal . p = offset. The normal is unit length with z >= 0.
struct PlaneFit {
  std::array<double, 3> normal{0.0, 0.0, 1.0};
  double offset = 0.0;
  int inlier_count = 0;
  double rms_residual_m = 0.0;
  FitMethod method = FitMethod::least_squares;
};

enum class OrientationConfidence { ok, flat_roof, low_points, fallback };

/// Compass convention: 0 = North, 90 = East, 180 = South. Azimuth is the
/// bearing the array faces (its downslope direction).
struct OrientationEstimate {
  double tilt_deg = 0.0;
  double azimuth_deg = 180.0;
  OrientationConfidence confidence = OrientationConfidence::ok;
};

struct FitParams {
  int min_points = 10;
  int iterations = 200;
  double inlier_dist_m = 0.10;
  double flat_threshold_deg = 5.0;
};

std::string_view to_string(FitMethod method);
std::string_view to_string(OrientationConfidence confidence);
OrientationConfidence parse_confidence(std::string_view text);

/// Reads a `x,y,z` CSV (header required).
PointSet load_pointcloud_csv(const std::filesystem::path& path, std::string crs_id = {});
void write_pointcloud_csv(const std::filesystem::path& path, const PointSet& cloud);

/// Points whose (x, y) lie inside or on the footprint (even-odd rule, edges
/// inclusive within 1e-9 m). Throws InvalidArgument on CRS mismatch.
PointSet clip_pointset(const PointSet& cloud, const ArrayPolygon& footprint);

/// RANSAC with `params.iterations` three-point samples drawn from a
/// generator seeded with `seed`, then a principal-axis refit over the
/// consensus set. Throws InvalidArgument with fewer than params.min_points.
PlaneFit fit_plane_robust(const PointSet& points, const FitParams& params, std::uint64_t seed);

OrientationEstimate plane_to_orientation(const PlaneFit& plane, const FitParams& params);

/// clip -> fit -> orientation, mapping too-small clips to low_points
/// (tilt 0, azimuth 180) instead of throwing.
struct ArrayOrientation {
  OrientationEstimate estimate;
  PlaneFit plane;
  std::size_t clipped_points = 0;
};
ArrayOrientation estimate_array_orientation(const PointSet& cloud, const ArrayPolygon& footprint,
                                            const FitParams& params, std::uint64_t seed);

}  // namespace pvparam
