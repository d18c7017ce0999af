#include "pvparam/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "pvparam/csv.hpp"
#include "pvparam/error.hpp"

namespace pvparam {

constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

// --- geometry agreement ---------------------------------------------------

double OverlapAreas::iou() const {
  const double uni = area_a + area_b - intersection;
  return uni > 0.0 ? std::clamp(intersection / uni, 0.0, 1.0) : 0.0;
}

double OverlapAreas::dice() const {
  const double sum = area_a + area_b;
  return sum > 0.0 ? std::clamp(2.0 * intersection / sum, 0.0, 1.0) : 0.0;
}

namespace {

// Rings with exteriors counterclockwise and holes clockwise, classified by
// their signed area rather than trusting the input.
std::vector<RingPoints> oriented_boundary(const geom::MultiPolygon& shape) {
  std::vector<RingPoints> rings;
  for (const auto& poly : shape) {
    bool outer = true;
    auto push = [&](const geom::Ring& r) {
      RingPoints ring(r.begin(), r.end());
      if (ring.size() > 1 && ring.front() == ring.back()) ring.pop_back();
      if (ring.size() < 3) return;
      const double sa = signed_ring_area(ring);
      if ((outer && sa < 0.0) || (!outer && sa > 0.0)) std::reverse(ring.begin(), ring.end());
      rings.push_back(std::move(ring));
    };
    push(poly.outer());
    outer = false;
    for (const auto& inner : poly.inners()) push(inner);
  }
  return rings;
}

struct RingSet {
  std::vector<Segment> edges;
  Box2 box;
};

RingSet ring_set(const std::vector<RingPoints>& rings) {
  RingSet rs;
  rs.box = {{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()},
            {std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()}};
  for (const auto& ring : rings) {
    for (std::size_t i = 0; i < ring.size(); ++i) {
      rs.edges.push_back({ring[i], ring[(i + 1) % ring.size()]});
      rs.box.min = {std::min(rs.box.min.x, ring[i].x), std::min(rs.box.min.y, ring[i].y)};
      rs.box.max = {std::max(rs.box.max.x, ring[i].x), std::max(rs.box.max.y, ring[i].y)};
    }
  }
  return rs;
}

bool inside_even_odd(const RingSet& rs, Point2 p) {
  bool in = false;
  for (const auto& e : rs.edges) {
    if ((e.a.y > p.y) != (e.b.y > p.y) && p.x < (e.b.x - e.a.x) * (p.y - e.a.y) / (e.b.y - e.a.y) + e.a.x) in = !in;
  }
  return in;
}

// Sum of x dy - y dx over the parts of `from`'s edges inside `other`.
// Pieces lying on an edge of `other` count only when `keep_shared` is set
// and both edges run the same way, so a shared boundary is counted once.
double boundary_inside(const RingSet& from, const RingSet& other, bool keep_shared, double tol) {
  double sum = 0.0;
  std::vector<double> ts;
  for (const auto& e : from.edges) {
    const Point2 d = e.b - e.a;
    const double len2 = dot(d, d);
    if (len2 == 0.0) continue;
    ts.assign({0.0, 1.0});
    for (const auto& f : other.edges) {
      const Point2 g = f.b - f.a;
      const double den = cross(d, g);
      const Point2 w = f.a - e.a;
      if (std::abs(den) > 1e-14 * std::sqrt(len2 * dot(g, g))) {
        const double t = cross(w, g) / den;
        const double u = cross(w, d) / den;
        if (t > 0.0 && t < 1.0 && u >= -1e-9 && u <= 1.0 + 1e-9) ts.push_back(t);
      }
      // Endpoints of the other edge on or next to this one split it too, so
      // nearly collinear overlaps are cut where they end.
      for (Point2 q : {f.a, f.b}) {
        if (point_segment_distance(q, e.a, e.b) > tol) continue;
        const double t = dot(q - e.a, d) / len2;
        if (t > 0.0 && t < 1.0) ts.push_back(t);
      }
    }
    std::sort(ts.begin(), ts.end());
    for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
      if (ts[k + 1] - ts[k] <= 1e-15) continue;
      const Point2 p = e.a + ts[k] * d;
      const Point2 q = e.a + ts[k + 1] * d;
      const Point2 m = 0.5 * (p + q);
      bool counted = false;
      bool on_edge = false;
      for (const auto& f : other.edges) {
        if (point_segment_distance(m, f.a, f.b) <= tol) {
          on_edge = true;
          counted = keep_shared && dot(f.b - f.a, d) > 0.0;
          break;
        }
      }
      if (!on_edge) counted = inside_even_odd(other, m);
      if (counted) sum += cross(p, q);
    }
  }
  return sum;
}

}  // namespace

double intersection_area(const geom::MultiPolygon& a, const geom::MultiPolygon& b) {
  const RingSet ra = ring_set(oriented_boundary(a));
  const RingSet rb = ring_set(oriented_boundary(b));
  if (ra.edges.empty() || rb.edges.empty()) return 0.0;
  if (ra.box.max.x < rb.box.min.x || rb.box.max.x < ra.box.min.x || ra.box.max.y < rb.box.min.y ||
      rb.box.max.y < ra.box.min.y) {
    return 0.0;
  }
  const double scale = std::max({ra.box.max.x - ra.box.min.x, ra.box.max.y - ra.box.min.y,
                                 rb.box.max.x - rb.box.min.x, rb.box.max.y - rb.box.min.y});
  const double tol = 1e-9 * std::max(scale, 1.0);
  // Shift to a local origin so the cross products stay well conditioned.
  const Point2 o = ra.box.min;
  auto shifted = [&](RingSet rs) {
    for (auto& e : rs.edges) e = {e.a - o, e.b - o};
    return rs;
  };
  const RingSet la = shifted(ra), lb = shifted(rb);
  const double twice = boundary_inside(la, lb, true, tol) + boundary_inside(lb, la, false, tol);
  return std::max(0.0, 0.5 * twice);
}

OverlapAreas overlap_areas(const geom::MultiPolygon& a, const geom::MultiPolygon& b) {
  OverlapAreas out;
  out.area_a = area(a);
  out.area_b = area(b);
  out.both_empty = out.area_a <= 0.0 && out.area_b <= 0.0;
  if (out.area_a > 0.0 && out.area_b > 0.0) {
    out.intersection = std::min({intersection_area(a, b), out.area_a, out.area_b});
  }
  return out;
}

double area_iou(const geom::MultiPolygon& a, const geom::MultiPolygon& b) { return overlap_areas(a, b).iou(); }
double area_iou(const ArrayPolygon& a, const ArrayPolygon& b) { return area_iou(to_multi(a), to_multi(b)); }
double dice_coefficient(const geom::MultiPolygon& a, const geom::MultiPolygon& b) {
  return overlap_areas(a, b).dice();
}
double dice_coefficient(const ArrayPolygon& a, const ArrayPolygon& b) {
  return dice_coefficient(to_multi(a), to_multi(b));
}

std::vector<Segment> boundary_segments(const geom::MultiPolygon& shape) {
  std::vector<Segment> out;
  for (const auto& ring : boundary_rings(shape)) {
    for (std::size_t i = 0; i < ring.size(); ++i) out.push_back({ring[i], ring[(i + 1) % ring.size()]});
  }
  return out;
}

namespace {

double directed_hausdorff(std::span<const Segment> from, std::span<const Segment> to, double step) {
  double worst = 0.0;
  auto nearest = [&](Point2 p) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : to) best = std::min(best, point_segment_distance(p, s.a, s.b));
    return best;
  };
  for (const auto& s : from) {
    const double len = std::hypot(s.b.x - s.a.x, s.b.y - s.a.y);
    const int pieces = std::max(1, static_cast<int>(std::ceil(len / step)));
    for (int k = 0; k <= pieces; ++k) {
      const double t = static_cast<double>(k) / pieces;
      worst = std::max(worst, nearest(s.a + t * (s.b - s.a)));
    }
  }
  return worst;
}

}  // namespace

double hausdorff_distance(std::span<const Segment> a, std::span<const Segment> b, double step) {
  if (a.empty() || b.empty()) throw InvalidArgument("hausdorff_distance: empty boundary");
  if (!(step > 0.0)) throw InvalidArgument("hausdorff_distance: step must be positive");
  return std::max(directed_hausdorff(a, b, step), directed_hausdorff(b, a, step));
}

double hausdorff_distance(const geom::MultiPolygon& a, const geom::MultiPolygon& b, double step) {
  const auto sa = boundary_segments(a);
  const auto sb = boundary_segments(b);
  return hausdorff_distance(sa, sb, step);
}

double hausdorff_distance(const ArrayPolygon& a, const ArrayPolygon& b, double step) {
  return hausdorff_distance(to_multi(a), to_multi(b), step);
}

double matching_score(const geom::MultiPolygon& candidate, const geom::MultiPolygon& footprint,
                      const ScoreOptions& options) {
  if (area(candidate) <= 0.0 || area(footprint) <= 0.0) return 0.0;
  const double iou = area_iou(candidate, footprint);
  if (iou <= 0.0) return 0.0;
  double hd = hausdorff_distance(candidate, footprint, options.hd_step_m);
  if (options.hd_normalizer) hd /= *options.hd_normalizer;
  return iou / (1.0 + hd);
}

double matching_score(const ArrayPolygon& candidate, const ArrayPolygon& footprint, const ScoreOptions& options) {
  return matching_score(to_multi(candidate), to_multi(footprint), options);
}

// --- capacity validation --------------------------------------------------

double quantile_linear(std::vector<double> values, double p) {
  if (values.empty()) throw InvalidArgument("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(p, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

ValidationReport capacity_validation_report(std::span<const RegionValue> predicted,
                                            std::span<const RegionValue> recorded, double margin_pct) {
  std::map<std::string, double> pred_by_id;
  for (const auto& p : predicted) {
    if (!pred_by_id.emplace(p.region_id, p.kwp).second) {
      throw InvalidArgument("duplicate predicted region_id '" + p.region_id + "'");
    }
  }
  ValidationReport rep;
  rep.margin_pct = margin_pct;
  std::set<std::string> seen;
  for (const auto& r : recorded) {
    if (!seen.insert(r.region_id).second) throw InvalidArgument("duplicate recorded region_id '" + r.region_id + "'");
    const auto it = pred_by_id.find(r.region_id);
    if (it == pred_by_id.end()) {
      rep.unmatched_region_ids.push_back(r.region_id);
      continue;
    }
    RegionComparison c{r.region_id, r.kwp, it->second, std::nullopt};
    if (r.kwp > 0.0) c.ape_pct = std::abs(c.predicted_kwp - c.recorded_kwp) / c.recorded_kwp * 100.0;
    rep.per_region.push_back(std::move(c));
  }
  for (const auto& [id, _] : pred_by_id) {
    if (!seen.count(id)) rep.unmatched_region_ids.push_back(id);
  }
  if (rep.per_region.empty()) throw InvalidArgument("validation: no region_id is shared by predictions and records");

  const auto n = static_cast<double>(rep.per_region.size());
  std::vector<double> rec, pre;
  double abs_sum = 0.0, ape_sum = 0.0;
  std::size_t ape_count = 0, within = 0;
  for (const auto& c : rep.per_region) {
    rec.push_back(c.recorded_kwp);
    pre.push_back(c.predicted_kwp);
    abs_sum += std::abs(c.predicted_kwp - c.recorded_kwp);
    if (c.ape_pct) {
      ape_sum += *c.ape_pct;
      ++ape_count;
      if (*c.ape_pct <= margin_pct) ++within;
    } else {
      ++rep.zero_recorded_excluded;
    }
  }
  rep.mae_kwp = abs_sum / n;
  rep.mape_pct = ape_count ? ape_sum / static_cast<double>(ape_count) : nan_value;
  rep.within_margin_fraction = ape_count ? static_cast<double>(within) / static_cast<double>(ape_count) : nan_value;

  const double mean_r = std::accumulate(rec.begin(), rec.end(), 0.0) / n;
  const double mean_p = std::accumulate(pre.begin(), pre.end(), 0.0) / n;
  double ss_res = 0.0, ss_tot = 0.0, s_pp = 0.0, s_rp = 0.0;
  for (std::size_t i = 0; i < rec.size(); ++i) {
    ss_res += (pre[i] - rec[i]) * (pre[i] - rec[i]);
    ss_tot += (rec[i] - mean_r) * (rec[i] - mean_r);
    s_pp += (pre[i] - mean_p) * (pre[i] - mean_p);
    s_rp += (rec[i] - mean_r) * (pre[i] - mean_p);
  }
  if (ss_tot > 0.0) {
    rep.r2 = 1.0 - ss_res / ss_tot;
  } else {
    rep.r2 = ss_res == 0.0 ? 1.0 : nan_value;
  }
  rep.r2_regression = (ss_tot > 0.0 && s_pp > 0.0) ? (s_rp * s_rp) / (ss_tot * s_pp) : nan_value;

  rep.quartiles_recorded_kwp = {quantile_linear(rec, 0.25), quantile_linear(rec, 0.5), quantile_linear(rec, 0.75)};
  rep.quartiles_predicted_kwp = {quantile_linear(pre, 0.25), quantile_linear(pre, 0.5), quantile_linear(pre, 0.75)};
  const std::array<double, 3> qr{rep.quartiles_recorded_kwp.q1, rep.quartiles_recorded_kwp.q2,
                                 rep.quartiles_recorded_kwp.q3};
  const std::array<double, 3> qp{rep.quartiles_predicted_kwp.q1, rep.quartiles_predicted_kwp.q2,
                                 rep.quartiles_predicted_kwp.q3};
  for (std::size_t k = 0; k < 3; ++k) {
    rep.quartile_delta_pct[k] = qr[k] > 0.0 ? (qp[k] - qr[k]) / qr[k] * 100.0 : nan_value;
    const RegionComparison* nearest = nullptr;
    for (const auto& c : rep.per_region) {
      if (!c.ape_pct) continue;
      if (!nearest || std::abs(c.recorded_kwp - qr[k]) < std::abs(nearest->recorded_kwp - qr[k])) nearest = &c;
    }
    if (nearest) {
      rep.quartile_region_ids[k] = nearest->region_id;
      rep.quartile_region_ape_pct[k] = *nearest->ape_pct;
    } else {
      rep.quartile_region_ape_pct[k] = nan_value;
    }
  }
  return rep;
}

std::string format_report_text(const ValidationReport& r) {
  std::string out;
  out += "Capacity validation\n";
  out += fmt::format("  regions compared          : {}\n", r.per_region.size());
  if (r.zero_recorded_excluded) {
    out += fmt::format("  zero-record exclusions    : {} (left out of MAPE and margin)\n", r.zero_recorded_excluded);
  }
  if (!r.unmatched_region_ids.empty()) {
    out += fmt::format("  unmatched region ids      : {}\n", r.unmatched_region_ids.size());
  }
  out += fmt::format("  R^2 (vs recorded)         : {:.4f}\n", r.r2);
  out += fmt::format("  R^2 (regression line)     : {:.4f}\n", r.r2_regression);
  out += fmt::format("  MAE                       : {:.2f} kW_p\n", r.mae_kwp);
  out += fmt::format("  MAPE                      : {:.2f}%\n", r.mape_pct);
  out += fmt::format("  within +/-{:g}% margin      : {:.2f}%\n", r.margin_pct, 100.0 * r.within_margin_fraction);
  const auto& qr = r.quartiles_recorded_kwp;
  const auto& qp = r.quartiles_predicted_kwp;
  out += fmt::format("  recorded quartiles        : {:.0f} kW_p, {:.0f} kW_p, and {:.0f} kW_p\n", qr.q1, qr.q2, qr.q3);
  out += fmt::format("  predicted quartiles       : {:.0f} kW_p, {:.0f} kW_p, and {:.0f} kW_p\n", qp.q1, qp.q2, qp.q3);
  out += fmt::format("  quartile-vs-quartile error: {:.1f}%, {:.1f}%, {:.1f}%\n", r.quartile_delta_pct[0],
                     r.quartile_delta_pct[1], r.quartile_delta_pct[2]);
  out += fmt::format("  APE at quartile regions   : {} {:.1f}%, {} {:.1f}%, {} {:.1f}%\n", r.quartile_region_ids[0],
                     r.quartile_region_ape_pct[0], r.quartile_region_ids[1], r.quartile_region_ape_pct[1],
                     r.quartile_region_ids[2], r.quartile_region_ape_pct[2]);
  out += "\n  region_id, recorded_kwp, predicted_kwp, ape_pct\n";
  for (const auto& c : r.per_region) {
    out += fmt::format("  {}, {}, {}, {}\n", c.region_id, format_number(c.recorded_kwp, 3),
                       format_number(c.predicted_kwp, 3), c.ape_pct ? format_number(*c.ape_pct, 3) : "n/a");
  }
  return out;
}

namespace {

std::string csv_row(std::string_view metric, double value, std::string_view unit) {
  return fmt::format("{},{},{}\n", metric, std::isfinite(value) ? format_number(value, 6) : "nan", unit);
}

}  // namespace

std::string format_report_csv(const ValidationReport& r) {
  std::string out = "metric,value,unit\n";
  out += csv_row("n_regions", static_cast<double>(r.per_region.size()), "count");
  out += csv_row("zero_recorded_excluded", static_cast<double>(r.zero_recorded_excluded), "count");
  out += csv_row("mae", r.mae_kwp, "kWp");
  out += csv_row("mape", r.mape_pct, "%");
  out += csv_row("r2", r.r2, "-");
  out += csv_row("r2_regression", r.r2_regression, "-");
  out += csv_row("margin", r.margin_pct, "%");
  out += csv_row("within_margin_fraction", r.within_margin_fraction, "-");
  const std::array<double, 3> qr{r.quartiles_recorded_kwp.q1, r.quartiles_recorded_kwp.q2,
                                 r.quartiles_recorded_kwp.q3};
  const std::array<double, 3> qp{r.quartiles_predicted_kwp.q1, r.quartiles_predicted_kwp.q2,
                                 r.quartiles_predicted_kwp.q3};
  for (int k = 0; k < 3; ++k) out += csv_row(fmt::format("recorded_q{}", k + 1), qr[k], "kWp");
  for (int k = 0; k < 3; ++k) out += csv_row(fmt::format("predicted_q{}", k + 1), qp[k], "kWp");
  for (int k = 0; k < 3; ++k) out += csv_row(fmt::format("quartile_delta_q{}", k + 1), r.quartile_delta_pct[k], "%");
  for (int k = 0; k < 3; ++k) {
    out += csv_row(fmt::format("quartile_region_ape_q{}", k + 1), r.quartile_region_ape_pct[k], "%");
  }
  for (const auto& c : r.per_region) {
    if (c.ape_pct) out += csv_row("ape:" + c.region_id, *c.ape_pct, "%");
  }
  return out;
}

// --- generation band and baselines ---------------------------------------

namespace {

void check_series(const PowerSeries& a, const PowerSeries& b, std::string_view what) {
  a.validate();
  b.validate();
  check_aligned(a.timestamps, b.timestamps, what);
}

struct PercentStats {
  double mean_abs_pct = 0.0;
  double cumulative_pct = 0.0;
  std::size_t n = 0;
};

// mean(|x - ref| / ref) and sum(x - ref) / sum(ref), both in percent, over
// rows where ref > eps.
PercentStats percent_stats(const std::vector<double>& x, const std::vector<double>& ref, double eps) {
  PercentStats s;
  double ratio_sum = 0.0, diff_sum = 0.0, ref_sum = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    if (!(ref[i] > eps)) continue;
    ratio_sum += std::abs(x[i] - ref[i]) / ref[i];
    diff_sum += x[i] - ref[i];
    ref_sum += ref[i];
    ++s.n;
  }
  if (s.n == 0) return s;
  s.mean_abs_pct = 100.0 * ratio_sum / static_cast<double>(s.n);
  s.cumulative_pct = 100.0 * diff_sum / ref_sum;
  return s;
}

}  // namespace

BandMetrics band_width_metrics(const PowerSeries& upper, const PowerSeries& lower, double eps_power) {
  check_series(upper, lower, "band_width_metrics");
  const PercentStats s = percent_stats(lower.values_wh, upper.values_wh, eps_power);
  if (s.n == 0) throw InvalidArgument("band_width_metrics: no timestamp has upper energy above eps_power");
  // Width is upper - lower, the negation of the lower-vs-upper cumulative error.
  return {s.mean_abs_pct, -s.cumulative_pct, s.n};
}

BaselineErrorMetrics baseline_error_metrics(const PowerSeries& baseline, const PowerSeries& upper,
                                            const PowerSeries& lower, double eps_power) {
  check_series(baseline, upper, "baseline_error_metrics (baseline vs upper)");
  check_series(baseline, lower, "baseline_error_metrics (baseline vs lower)");
  const PercentStats h = percent_stats(baseline.values_wh, upper.values_wh, eps_power);
  const PercentStats l = percent_stats(baseline.values_wh, lower.values_wh, eps_power);
  if (h.n == 0 || l.n == 0) {
    throw InvalidArgument("baseline_error_metrics: a reference series has no value above eps_power");
  }
  return {h.mean_abs_pct, l.mean_abs_pct, h.cumulative_pct, l.cumulative_pct, h.n, l.n};
}

std::string format_band_csv(const BandMetrics& band, const std::optional<BaselineErrorMetrics>& baseline) {
  std::string out = "metric,value,unit\n";
  out += csv_row("mapw", band.mapw_pct, "%");
  out += csv_row("cpw", band.cpw_pct, "%");
  out += csv_row("n_used", static_cast<double>(band.n_used), "count");
  if (baseline) {
    out += csv_row("mape_h", baseline->mape_h_pct, "%");
    out += csv_row("mape_l", baseline->mape_l_pct, "%");
    out += csv_row("cpe_h", baseline->cpe_h_pct, "%");
    out += csv_row("cpe_l", baseline->cpe_l_pct, "%");
    out += csv_row("n_used_upper", static_cast<double>(baseline->n_used_upper), "count");
    out += csv_row("n_used_lower", static_cast<double>(baseline->n_used_lower), "count");
  }
  return out;
}

}  // namespace pvparam
