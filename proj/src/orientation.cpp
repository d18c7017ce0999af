#include "pvparam/orientation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "pvparam/csv.hpp"
#include "pvparam/error.hpp"

namespace pvparam {

namespace {

constexpr double rad2deg = 180.0 / std::numbers::pi;

using Vec3 = Eigen::Vector3d;

Vec3 to_vec(const Point3& p) { return {p.x, p.y, p.z}; }

struct PrincipalPlane {
  Vec3 normal;
  Vec3 centroid;
  bool degenerate = false;
};

// Total least squares: the normal is the eigenvector of the smallest
// eigenvalue of the centered covariance.
PrincipalPlane principal_plane(const std::vector<Point3>& pts, const std::vector<std::size_t>& idx) {
  PrincipalPlane out;
  Vec3 c = Vec3::Zero();
  for (std::size_t i : idx) c += to_vec(pts[i]);
  c /= static_cast<double>(idx.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (std::size_t i : idx) {
    const Vec3 d = to_vec(pts[i]) - c;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  const Vec3 ev = solver.eigenvalues();
  out.normal = solver.eigenvectors().col(0).normalized();
  out.centroid = c;
  // Collinear support leaves two vanishing eigenvalues.
  out.degenerate = ev(1) <= 1e-12 * std::max(ev(2), 1e-300);
  return out;
}

PlaneFit finish(const Vec3& normal_in, const Vec3& centroid, const std::vector<Point3>& pts,
                const std::vector<std::size_t>& inliers, FitMethod method) {
  Vec3 n = normal_in.normalized();
  if (n.z() < 0.0) n = -n;
  PlaneFit fit;
  fit.normal = {n.x(), n.y(), n.z()};
  fit.offset = n.dot(centroid);
  fit.inlier_count = static_cast<int>(inliers.size());
  double ss = 0.0;
  for (std::size_t i : inliers) {
    const double r = n.dot(to_vec(pts[i])) - fit.offset;
    ss += r * r;
  }
  fit.rms_residual_m = inliers.empty() ? 0.0 : std::sqrt(ss / static_cast<double>(inliers.size()));
  fit.method = method;
  return fit;
}

PlaneFit horizontal_fallback(const std::vector<Point3>& pts) {
  std::vector<double> z;
  z.reserve(pts.size());
  for (const auto& p : pts) z.push_back(p.z);
  const std::size_t mid = z.size() / 2;
  std::nth_element(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(mid), z.end());
  double median = z[mid];
  if (z.size() % 2 == 0) {
    const double lower = *std::max_element(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (median + lower);
  }
  std::vector<std::size_t> all(pts.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return finish(Vec3::UnitZ(), Vec3(0.0, 0.0, median), pts, all, FitMethod::fallback);
}

std::vector<std::size_t> inliers_of(const std::vector<Point3>& pts, const Vec3& n, double offset, double dist) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (std::abs(n.dot(to_vec(pts[i])) - offset) <= dist) out.push_back(i);
  }
  return out;
}

}  // namespace

std::string_view to_string(FitMethod method) {
  switch (method) {
    case FitMethod::least_squares: return "least_squares";
    case FitMethod::ransac_refit: return "ransac_refit";
    case FitMethod::fallback: return "fallback";
  }
  return "fallback";
}

std::string_view to_string(OrientationConfidence confidence) {
  switch (confidence) {
    case OrientationConfidence::ok: return "ok";
    case OrientationConfidence::flat_roof: return "flat_roof";
    case OrientationConfidence::low_points: return "low_points";
    case OrientationConfidence::fallback: return "fallback";
  }
  return "fallback";
}

OrientationConfidence parse_confidence(std::string_view text) {
  if (text == "ok") return OrientationConfidence::ok;
  if (text == "flat_roof") return OrientationConfidence::flat_roof;
  if (text == "low_points") return OrientationConfidence::low_points;
  if (text == "fallback") return OrientationConfidence::fallback;
  throw FormatError(fmt::format("unknown orientation confidence '{}'", text));
}

PointSet load_pointcloud_csv(const std::filesystem::path& path, std::string crs_id) {
  const CsvTable table = read_csv(path, {"x", "y", "z"});
  const std::size_t cx = table.column("x"), cy = table.column("y"), cz = table.column("z");
  PointSet cloud;
  cloud.crs_id = std::move(crs_id);
  cloud.points.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    cloud.points.push_back({table.number(r, cx), table.number(r, cy), table.number(r, cz)});
  }
  return cloud;
}

void write_pointcloud_csv(const std::filesystem::path& path, const PointSet& cloud) {
  std::string out = "x,y,z\n";
  for (const auto& p : cloud.points) {
    out += fmt::format("{},{},{}\n", format_number(p.x, 4), format_number(p.y, 4), format_number(p.z, 4));
  }
  write_file_atomic(path, out);
}

PointSet clip_pointset(const PointSet& cloud, const ArrayPolygon& footprint) {
  if (cloud.crs_id != footprint.crs_id) {
    throw InvalidArgument(fmt::format("point cloud CRS '{}' does not match footprint CRS '{}'", cloud.crs_id,
                                      footprint.crs_id));
  }
  constexpr double tol = 1e-9;
  const Box2 box = bounding_box(footprint);
  PointSet out;
  out.crs_id = cloud.crs_id;
  for (const auto& p : cloud.points) {
    if (p.x < box.min.x - tol || p.x > box.max.x + tol || p.y < box.min.y - tol || p.y > box.max.y + tol) continue;
    if (contains_point(footprint, {p.x, p.y}, tol)) out.points.push_back(p);
  }
  return out;
}

PlaneFit fit_plane_robust(const PointSet& points, const FitParams& params, std::uint64_t seed) {
  const auto& pts = points.points;
  const std::size_t n = pts.size();
  if (static_cast<int>(n) < std::max(params.min_points, 3)) {
    throw InvalidArgument(fmt::format("plane fit needs at least {} points, got {}", params.min_points, n));
  }

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::size_t best_count = 0;
  Vec3 best_normal = Vec3::UnitZ();
  double best_offset = 0.0;
  for (int it = 0; it < params.iterations; ++it) {
    const std::size_t i = pick(rng);
    std::size_t j = pick(rng);
    std::size_t k = pick(rng);
    if (i == j || j == k || i == k) continue;
    const Vec3 a = to_vec(pts[i]);
    const Vec3 ab = to_vec(pts[j]) - a;
    const Vec3 ac = to_vec(pts[k]) - a;
    const Vec3 nrm = ab.cross(ac);
    const double scale = ab.norm() * ac.norm();
    if (scale == 0.0 || nrm.norm() <= 1e-9 * scale) continue;
    const Vec3 unit = nrm.normalized();
    const double offset = unit.dot(a);
    std::size_t count = 0;
    for (const auto& p : pts) {
      if (std::abs(unit.dot(to_vec(p)) - offset) <= params.inlier_dist_m) ++count;
    }
    if (count > best_count) {
      best_count = count;
      best_normal = unit;
      best_offset = offset;
    }
  }
  if (best_count < 3) return horizontal_fallback(pts);

  std::vector<std::size_t> inliers = inliers_of(pts, best_normal, best_offset, params.inlier_dist_m);
  PrincipalPlane plane = principal_plane(pts, inliers);
  if (plane.degenerate) return horizontal_fallback(pts);
  // The principal-axis plane can move the consensus set; settle it.
  for (int round = 0; round < 3; ++round) {
    auto refreshed = inliers_of(pts, plane.normal, plane.normal.dot(plane.centroid), params.inlier_dist_m);
    if (refreshed == inliers || refreshed.size() < 3) break;
    PrincipalPlane candidate = principal_plane(pts, refreshed);
    if (candidate.degenerate) break;
    inliers = std::move(refreshed);
    plane = candidate;
  }
  const FitMethod method = inliers.size() == n ? FitMethod::least_squares : FitMethod::ransac_refit;
  return finish(plane.normal, plane.centroid, pts, inliers, method);
}

OrientationEstimate plane_to_orientation(const PlaneFit& plane, const FitParams& params) {
  OrientationEstimate est;
  if (plane.method == FitMethod::fallback) {
    est.tilt_deg = 0.0;
    est.azimuth_deg = 180.0;
    est.confidence = OrientationConfidence::fallback;
    return est;
  }
  const double nx = plane.normal[0];
  const double ny = plane.normal[1];
  const double nz = std::clamp(plane.normal[2], 0.0, 1.0);
  est.tilt_deg = std::acos(nz) * rad2deg;
  if (est.tilt_deg >= 90.0) est.tilt_deg = std::nextafter(90.0, 0.0);
  if (est.tilt_deg < params.flat_threshold_deg) {
    est.azimuth_deg = 180.0;
    est.confidence = OrientationConfidence::flat_roof;
    return est;
  }
  // The normal leans toward the downslope side; x = East, y = North.
  double az = std::atan2(nx, ny) * rad2deg;
  if (az < 0.0) az += 360.0;
  if (az >= 360.0) az -= 360.0;
  est.azimuth_deg = az;
  est.confidence = OrientationConfidence::ok;
  return est;
}

ArrayOrientation estimate_array_orientation(const PointSet& cloud, const ArrayPolygon& footprint,
                                            const FitParams& params, std::uint64_t seed) {
  ArrayOrientation out;
  const PointSet clipped = clip_pointset(cloud, footprint);
  out.clipped_points = clipped.points.size();
  if (static_cast<int>(clipped.points.size()) < std::max(params.min_points, 3)) {
    out.plane.method = FitMethod::fallback;
    out.estimate = {0.0, 180.0, OrientationConfidence::low_points};
    return out;
  }
  out.plane = fit_plane_robust(clipped, params, seed);
  out.estimate = plane_to_orientation(out.plane, params);
  return out;
}

}  // namespace pvparam
