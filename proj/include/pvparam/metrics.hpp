#pragma once

// Agreement metrics between shapes, capacity validation statistics and the
// band-width / baseline-error percentages over power series.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pvparam/geometry.hpp"
#include "pvparam/timeseries.hpp"

namespace pvparam {

// --- geometry agreement ---------------------------------------------------

struct OverlapAreas {
  double area_a = 0.0;
  double area_b = 0.0;
  double intersection = 0.0;
  /// Both shapes empty; iou() and dice() then report 0.
  bool both_empty = false;

  double iou() const;
  double dice() const;
};

/// Area of a ∩ b from the boundary pieces of each shape lying inside the
/// other; shared edges are counted once.
double intersection_area(const geom::MultiPolygon& a, const geom::MultiPolygon& b);

OverlapAreas overlap_areas(const geom::MultiPolygon& a, const geom::MultiPolygon& b);

double area_iou(const geom::MultiPolygon& a, const geom::MultiPolygon& b);
double area_iou(const ArrayPolygon& a, const ArrayPolygon& b);
double dice_coefficient(const geom::MultiPolygon& a, const geom::MultiPolygon& b);
double dice_coefficient(const ArrayPolygon& a, const ArrayPolygon& b);

struct Segment {
  Point2 a;
  Point2 b;
};

std::vector<Segment> boundary_segments(const geom::MultiPolygon& shape);

/// Symmetric Hausdorff distance between two boundaries given as segment
/// sets. Each side is sampled at arc-length spacing <= step (plus every
/// vertex) and measured exactly against the other side's segments.
double hausdorff_distance(std::span<const Segment> a, std::span<const Segment> b, double step);

/// Boundary Hausdorff distance in the units of the coordinates (meters for
/// projected data). Throws InvalidArgument when either shape is empty.
double hausdorff_distance(const geom::MultiPolygon& a, const geom::MultiPolygon& b, double step = 0.05);
double hausdorff_distance(const ArrayPolygon& a, const ArrayPolygon& b, double step = 0.05);

struct ScoreOptions {
  double hd_step_m = 0.05;
  /// When set, HD is divided by this length (e.g. the footprint MBR
  /// diagonal) before entering the score.
  std::optional<double> hd_normalizer;
};

/// S = IoU / (1 + HD). An empty candidate scores 0.
double matching_score(const geom::MultiPolygon& candidate, const geom::MultiPolygon& footprint,
                      const ScoreOptions& options = {});
double matching_score(const ArrayPolygon& candidate, const ArrayPolygon& footprint, const ScoreOptions& options = {});

// --- capacity validation --------------------------------------------------

struct RegionValue {
  std::string region_id;
  double kwp = 0.0;
};

struct RegionComparison {
  std::string region_id;
  double recorded_kwp = 0.0;
  double predicted_kwp = 0.0;
  /// Absent when the recorded value is zero.
  std::optional<double> ape_pct;
};

struct Quartiles {
  double q1 = 0.0;
  double q2 = 0.0;
  double q3 = 0.0;
};

struct ValidationReport {
  double mae_kwp = 0.0;
  double mape_pct = 0.0;
  /// Coefficient of determination of predictions against recorded values.
  double r2 = 0.0;
  /// Squared Pearson correlation, i.e. R^2 of the least-squares line.
  double r2_regression = 0.0;
  double within_margin_fraction = 0.0;
  double margin_pct = 25.0;
  Quartiles quartiles_recorded_kwp;
  Quartiles quartiles_predicted_kwp;
  /// (predicted quartile - recorded quartile) / recorded quartile * 100.
  std::array<double, 3> quartile_delta_pct{};
  /// APE of the region whose recorded value is nearest each recorded
  /// quartile.
  std::array<std::string, 3> quartile_region_ids;
  std::array<double, 3> quartile_region_ape_pct{};
  std::vector<RegionComparison> per_region;
  std::size_t zero_recorded_excluded = 0;
  std::vector<std::string> unmatched_region_ids;
};

/// Linear interpolation between order statistics (position p*(n-1)).
double quantile_linear(std::vector<double> values, double p);

/// Inner join on region_id. Throws InvalidArgument when the join is empty
/// or ids repeat. Zero recorded values are excluded from the percentage
/// statistics and counted in zero_recorded_excluded.
ValidationReport capacity_validation_report(std::span<const RegionValue> predicted,
                                            std::span<const RegionValue> recorded, double margin_pct = 25.0);

std::string format_report_text(const ValidationReport& report);
/// `metric,value,unit` rows.
std::string format_report_csv(const ValidationReport& report);

// --- generation band and baselines ---------------------------------------

struct BandMetrics {
  double mapw_pct = 0.0;
  double cpw_pct = 0.0;
  std::size_t n_used = 0;
};

struct BaselineErrorMetrics {
  double mape_h_pct = 0.0;
  double mape_l_pct = 0.0;
  double cpe_h_pct = 0.0;
  double cpe_l_pct = 0.0;
  std::size_t n_used_upper = 0;
  std::size_t n_used_lower = 0;
};

/// MAPW and CPW over timestamps with upper > eps_power.
BandMetrics band_width_metrics(const PowerSeries& upper, const PowerSeries& lower, double eps_power = 1.0);

/// MAPE and signed CPE of a baseline against each bound, each filtered on
/// its own reference exceeding eps_power. A baseline above the reference
/// yields a positive CPE.
BaselineErrorMetrics baseline_error_metrics(const PowerSeries& baseline, const PowerSeries& upper,
                                            const PowerSeries& lower, double eps_power = 1.0);

/// `metric,value,unit` rows; `baseline` may be absent.
std::string format_band_csv(const BandMetrics& band, const std::optional<BaselineErrorMetrics>& baseline);

}  // namespace pvparam
