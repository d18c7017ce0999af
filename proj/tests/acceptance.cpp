// Acceptance checks: prints one PASS/FAIL line per criterion and exits
// nonzero when any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "demo_scene.hpp"
#include "oracles.hpp"
#include "pvparam/layout.hpp"
#include "pvparam/metrics.hpp"
#include "pvparam/orientation.hpp"
#include "pvparam/profile.hpp"
#include "pvparam/raster_vectorize.hpp"
#include "test_util.hpp"

using namespace pvparam;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

geom::MultiPolygon to_multi_shape(const oracle::Shape& shape) {
  ArrayPolygon p;
  p.id = "s";
  p.crs_id = "EPSG:28992";
  p.exterior = shape[0];
  p.holes.assign(shape.begin() + 1, shape.end());
  normalize(p);
  return to_multi(p);
}

// Pixel-center raster counts over [0,1]^2 from per-row span overlaps.
oracle::RasterOverlap span_raster(const oracle::Shape& a, const oracle::Shape& b, int n) {
  std::vector<double> xa, xb;
  auto spans = [&](const std::vector<double>& xs) {
    std::vector<std::pair<int, int>> out;
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const int c0 = std::max(0, static_cast<int>(std::ceil(xs[k] * n - 0.5)));
      const int c1 = std::min(n - 1, static_cast<int>(std::floor(xs[k + 1] * n - 0.5)));
      if (c1 >= c0) out.emplace_back(c0, c1);
    }
    return out;
  };
  std::int64_t ca = 0, cb = 0, cab = 0;
  for (int r = 0; r < n; ++r) {
    const double y = (r + 0.5) / n;
    oracle::crossings(a, y, xa);
    oracle::crossings(b, y, xb);
    const auto sa = spans(xa), sb = spans(xb);
    for (const auto& s : sa) ca += s.second - s.first + 1;
    for (const auto& s : sb) cb += s.second - s.first + 1;
    for (const auto& p : sa) {
      for (const auto& q : sb) {
        const int lo = std::max(p.first, q.first), hi = std::min(p.second, q.second);
        if (hi >= lo) cab += hi - lo + 1;
      }
    }
  }
  const double px = 1.0 / (double(n) * n);
  return {ca * px, cb * px, cab * px};
}

oracle::Shape random_shape(std::mt19937_64& rng, bool with_hole) {
  oracle::Ring star = oracle::random_star(rng);
  oracle::Shape s{star};
  if (with_hole) {
    double cx = 0, cy = 0;
    for (const auto& p : star) cx += p.x, cy += p.y;
    // The star's own center is not stored; a hole around the vertex mean may
    // cross the boundary, so keep it tiny and check it is inside.
    cx /= star.size();
    cy /= star.size();
    const double h = 0.01;
    const oracle::Ring hole{{cx - h, cy - h}, {cx - h, cy + h}, {cx + h, cy + h}, {cx + h, cy - h}};
    std::vector<double> xs;
    bool inside = true;
    for (double y : {cy - h, cy + h}) {
      oracle::crossings({star}, y, xs);
      bool ok = false;
      for (std::size_t k = 0; k + 1 < xs.size(); k += 2) ok |= xs[k] < cx - h && xs[k + 1] > cx + h;
      inside &= ok;
    }
    if (inside) s.push_back(hole);
  }
  return s;
}

// 1. IoU / Dice against a 2048^2 raster.
Outcome criterion1() {
  std::mt19937_64 rng(2048);
  double worst_iou = 0.0, worst_dice = 0.0, worst_identity = 0.0, lib_seconds = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const oracle::Shape a = random_shape(rng, i % 3 == 0), b = random_shape(rng, i % 4 == 1);
    const auto ma = to_multi_shape(a), mb = to_multi_shape(b);
    const auto t0 = Clock::now();
    const double iou = area_iou(ma, mb), dice = dice_coefficient(ma, mb);
    lib_seconds += seconds_since(t0);
    const auto ras = span_raster(a, b, 2048);
    worst_iou = std::max(worst_iou, std::abs(iou - ras.iou()));
    worst_dice = std::max(worst_dice, std::abs(dice - ras.dice()));
    worst_identity = std::max(worst_identity, std::abs(dice - 2.0 * iou / (1.0 + iou)));
  }
  const bool pass = worst_iou <= 1e-3 && worst_dice <= 1e-3 && worst_identity <= 1e-9 && lib_seconds <= 60.0;
  return {pass, fmt::format("max |dIoU| {:.2e}, max |dDice| {:.2e}, identity {:.1e}, {:.2f} s", worst_iou, worst_dice,
                            worst_identity, lib_seconds)};
}

// 2. Rotating calipers against the angle sweep.
Outcome criterion2() {
  std::mt19937_64 rng(1000);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    std::uniform_real_distribution<double> u(-50.0, 50.0), s(0.5, 30.0);
    const double sx = s(rng), sy = s(rng), cx = u(rng), cy = u(rng), ang = u(rng);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<Point2> pts;
    const int n = 3 + static_cast<int>(rng() % 60);
    for (int k = 0; k < n; ++k) {
      const double x = sx * g(rng), y = sy * g(rng);
      pts.push_back({cx + x * std::cos(ang) - y * std::sin(ang), cy + x * std::sin(ang) + y * std::cos(ang)});
    }
    const std::vector<Point2> hull = oracle::gift_wrap(pts);
    const double lib = minimal_area_rectangle(hull, 0.0).area();
    const double ref = oracle::mbr_area_sweep(hull);
    worst = std::max(worst, std::abs(lib - ref) / ref);
  }
  return {worst <= 1e-6, fmt::format("max relative area difference {:.2e}", worst)};
}

// 3. Vectorization of noisy synthetic scenes.
struct Scene {
  std::string name;
  oracle::Shape shape;  // pixel-edge coordinates
};

std::vector<Scene> scenes() {
  using oracle::rectangle;
  using oracle::Ring;
  auto poly = [](std::initializer_list<Point2> pts) { return Ring(pts); };
  auto rot = [](Ring r, double deg) { return oracle::rotated(r, oracle::rad(deg), {64, 64}); };
  std::vector<Scene> s;
  s.push_back({"rect small", {rectangle(40, 40, 70, 60)}});
  s.push_back({"rect wide", {rectangle(10, 50, 118, 80)}});
  s.push_back({"rect square", {rectangle(30, 30, 90, 90)}});
  s.push_back({"rect tall", {rectangle(55, 8, 80, 120)}});
  s.push_back({"L 1", {poly({{20, 20}, {100, 20}, {100, 50}, {50, 50}, {50, 100}, {20, 100}})}});
  s.push_back({"L 2", {poly({{30, 30}, {60, 30}, {60, 80}, {110, 80}, {110, 110}, {30, 110}})}});
  s.push_back({"L 3", {poly({{15, 60}, {110, 60}, {110, 110}, {85, 110}, {85, 85}, {15, 85}})}});
  s.push_back({"L 4", {poly({{40, 10}, {70, 10}, {70, 90}, {120, 90}, {120, 118}, {40, 118}})}});
  s.push_back({"T 1", {poly({{10, 20}, {118, 20}, {118, 50}, {80, 50}, {80, 110}, {48, 110}, {48, 50}, {10, 50}})}});
  s.push_back({"T 2", {poly({{20, 10}, {50, 10}, {50, 50}, {110, 50}, {110, 80}, {50, 80}, {50, 118}, {20, 118}})}});
  s.push_back({"T 3", {poly({{30, 90}, {55, 90}, {55, 20}, {75, 20}, {75, 90}, {100, 90}, {100, 115}, {30, 115}})}});
  s.push_back({"U 1", {poly({{10, 20}, {40, 20}, {40, 80}, {88, 80}, {88, 20}, {118, 20}, {118, 110}, {10, 110}})}});
  s.push_back({"U 2", {poly({{20, 10}, {110, 10}, {110, 40}, {50, 40}, {50, 80}, {110, 80}, {110, 115}, {20, 115}})}});
  s.push_back({"U 3", {poly({{30, 30}, {55, 30}, {55, 70}, {75, 70}, {75, 30}, {100, 30}, {100, 100}, {30, 100}})}});
  s.push_back({"holed rect", {rectangle(15, 15, 113, 113), rectangle(50, 50, 80, 75)}});
  s.push_back({"holed wide", {rectangle(10, 30, 118, 100), rectangle(30, 50, 60, 80)}});
  s.push_back({"holed L", {poly({{10, 10}, {110, 10}, {110, 60}, {60, 60}, {60, 118}, {10, 118}}),
                           rectangle(25, 25, 45, 45)}});
  s.push_back({"rotated rect 15", {rot(rectangle(25, 40, 105, 88), 15)}});
  s.push_back({"rotated rect 37", {rot(rectangle(30, 45, 100, 80), 37)}});
  s.push_back({"rotated L 60", {rot(poly({{30, 30}, {100, 30}, {100, 55}, {55, 55}, {55, 100}, {30, 100}}), 60)}});
  return s;
}

Outcome criterion3() {
  const int size = 128;
  std::mt19937_64 rng(20);
  double worst = 1.0;
  std::string worst_name;
  int passed = 0;
  const auto all = scenes();
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto& sc = all[i];
    GeoreferencedMask clean = testutil::blank_mask(size, size);
    std::vector<double> xs;
    std::vector<std::uint8_t> row(size);
    for (int r = 0; r < size; ++r) {
      oracle::crossings(sc.shape, r + 0.5, xs);
      oracle::fill_row(xs, {0.0, 0.0, double(size), double(size)}, size, row);
      for (int c = 0; c < size; ++c) clean.bits[std::size_t(r) * size + c] = row[c];
    }
    GeoreferencedMask noisy = clean;
    const double rate = 0.01 + 0.01 * (i % 2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& b : noisy.bits) {
      if (u(rng) < rate) b ^= 1;
    }
    const auto polys = vectorize_mask(noisy, RefineParams{});
    // Back to pixel-edge coordinates of the north-up mask.
    oracle::Shape shape;
    for (const auto& p : polys) {
      for (const auto& ring : testutil::rings_of(p)) {
        oracle::Ring out;
        for (const auto& q : ring) out.push_back({q.x - (clean.transform.c - 0.5), (clean.transform.f + 0.5) - q.y});
        shape.push_back(out);
      }
    }
    const double iou = oracle::iou_vs_mask(shape, clean.bits, size, size, 4);
    if (iou >= 0.95) ++passed;
    if (iou < worst) worst = iou, worst_name = sc.name;
  }
  return {passed == static_cast<int>(all.size()),
          fmt::format("{}/{} scenes >= 0.95, lowest {:.4f} ({})", passed, all.size(), worst, worst_name)};
}

// 4. Orientation recovery.
PointSet plane_points(std::mt19937_64& rng, double tilt, double az, int n, double sigma, double outlier_frac) {
  std::uniform_real_distribution<double> u(-4.0, 4.0), out(-2.0, 2.0), unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, sigma);
  const double a = oracle::rad(az), slope = std::tan(oracle::rad(tilt));
  PointSet ps;
  ps.crs_id = "EPSG:28992";
  for (int i = 0; i < n; ++i) {
    const double x = u(rng), y = u(rng);
    double z = 10.0 - slope * (x * std::sin(a) + y * std::cos(a));
    z += unit(rng) < outlier_frac ? out(rng) : noise(rng);
    ps.points.push_back({x, y, z});
  }
  return ps;
}

Outcome criterion4() {
  const double tilts[] = {5, 15, 25, 35, 45};
  FitParams params;
  // The 5 degree cases must not be classed as flat roofs.
  params.flat_threshold_deg = 1.0;
  int ok = 0, total = 0;
  double worst_tilt = 0.0, worst_az = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const double tilt = tilts[trial % 5];
    const double az = 45.0 * ((trial / 5) % 8);
    std::mt19937_64 rng(9000 + trial);
    const PointSet pts = plane_points(rng, tilt, az, 500, 0.05, 0.2);
    const auto est = plane_to_orientation(fit_plane_robust(pts, params, 77 + trial), params);
    const double et = std::abs(est.tilt_deg - tilt), ea = oracle::bearing_diff(est.azimuth_deg, az);
    worst_tilt = std::max(worst_tilt, et);
    worst_az = std::max(worst_az, ea);
    ok += (et <= 1.0 && ea <= 2.0);
    ++total;
  }
  const double frac = double(ok) / total;
  return {frac >= 0.95, fmt::format("{}/{} trials within tolerance ({:.1f}%), worst tilt {:.2f} deg, worst azimuth "
                                    "{:.2f} deg",
                                    ok, total, 100.0 * frac, worst_tilt, worst_az)};
}

// 5. Layout recovery on exact grids.
Outcome criterion5() {
  const auto templates = builtin_module_templates();
  int cases = 0, good = 0, swapped = 0;
  std::string first_fail;
  for (const auto& t : templates) {
    for (auto o : {ModuleOrientation::portrait, ModuleOrientation::landscape}) {
      for (double tilt : {0.0, 20.0, 35.0}) {
        const CellDimensions cell = plan_cell_dimensions(t, o, tilt);
        for (int p = 1; p <= 3; ++p) {
          for (int q = 1; q <= 3; ++q) {
            ++cases;
            // Columns along x, foreshortened rows along y, array facing south.
            const double w = p * cell.along_mbr_long_m, h = q * cell.along_mbr_short_m;
            const ArrayPolygon fp = testutil::rect(155000.0, 385000.0, 155000.0 + w, 385000.0 + h, "g");
            LayoutParams lp;
            lp.alignment = GridAlignment::downslope;
            lp.downslope_azimuth_deg = 180.0;
            const ModuleLayout lay = infer_best_layout(fp, tilt, templates, lp);
            const auto& got = templates[static_cast<std::size_t>(lay.template_index)];
            // A template with the same module dimensions is indistinguishable from the generator.
            const bool same_template = lay.template_index == t.index ||
                                       (got.height_mm == t.height_mm && got.width_mm == t.width_mm);
            const bool base = lay.module_count == p * q && same_template && lay.score >= 0.95 &&
                              lay.candidates_evaluated == 46;
            // 2:1 modules: p landscape columns by 2 rows cover the same flat rectangle as 2p portrait columns
            // by 1 row. Accept the other orientation only when its cells tile the footprint exactly.
            const bool tiles = lay.score >= 1.0 - 1e-9 &&
                               std::abs(pvparam::area(lay.layout_polygon) - w * h) <= 1e-6 * w * h;
            const bool ok = base && (lay.orientation == o || tiles);
            good += ok;
            swapped += ok && lay.orientation != o;
            if (!ok && first_fail.empty()) {
              first_fail = fmt::format("; first miss: template {} {} tilt {} {}x{} -> template {} {} count {} score "
                                       "{:.4f}",
                                       t.index, to_string(o), tilt, p, q, lay.template_index,
                                       to_string(lay.orientation), lay.module_count, lay.score);
            }
          }
        }
      }
    }
  }
  return {good == cases, fmt::format("{}/{} footprints recovered ({} as an exactly tiling swapped orientation){}", good,
                                    cases, swapped, first_fail)};
}

PowerSeries hourly(std::vector<double> v) {
  PowerSeries s;
  const Instant t0 = std::chrono::sys_days{std::chrono::year{2022} / 6 / 1};
  for (std::size_t i = 0; i < v.size(); ++i) s.timestamps.push_back(t0 + std::chrono::hours(i));
  s.values_wh = std::move(v);
  return s;
}

// 6. Band and baseline formulas on the hand-derived triple.
Outcome criterion6() {
  const auto up = hourly({1000, 2000, 4000});
  const auto lo = hourly({800, 1500, 3600});
  const auto base = hourly({900, 1800, 4200});
  const auto band = band_width_metrics(up, lo);
  const auto err = baseline_error_metrics(base, up, lo);
  // Exact fractions worked by hand.
  const double mapw = 100.0 * (0.2 + 0.25 + 0.1) / 3.0;
  const double cpw = 100.0 * 1100.0 / 7000.0;
  const double mape_h = 100.0 * (0.1 + 0.1 + 0.05) / 3.0;
  const double cpe_h = 100.0 * (6900.0 - 7000.0) / 7000.0;
  const double d = std::max({std::abs(band.mapw_pct - mapw), std::abs(band.cpw_pct - cpw),
                             std::abs(err.mape_h_pct - mape_h), std::abs(err.cpe_h_pct - cpe_h)});
  const bool rounded = std::abs(band.mapw_pct - 18.333) < 5e-4 && std::abs(band.cpw_pct - 15.714) < 5e-4 &&
                       std::abs(err.mape_h_pct - 8.333) < 5e-4 && std::abs(err.cpe_h_pct + 1.4286) < 5e-5;
  // Under-production relative to the upper bound reads as a negative CPE.
  const auto under = baseline_error_metrics(hourly({500, 1000, 2000}), up, lo);
  const bool sign = err.cpe_h_pct < 0.0 && under.cpe_h_pct < 0.0;
  return {d <= 1e-6 && rounded && sign,
          fmt::format("MAPW {:.6f}, CPW {:.6f}, MAPE_H {:.6f}, CPE_H {:.6f}, max deviation {:.1e}", band.mapw_pct,
                      band.cpw_pct, err.mape_h_pct, err.cpe_h_pct, d)};
}

std::vector<RegionValue> values(const std::vector<double>& v) {
  std::vector<RegionValue> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back({fmt::format("r{}", i), v[i]});
  return out;
}

// 7. Validation report.
Outcome criterion7() {
  const auto rep = capacity_validation_report(values({100, 200, 300}), values({110, 190, 330}), 25.0);
  const double mae = 50.0 / 3.0;
  const double mape = 100.0 * (10.0 / 110.0 + 10.0 / 190.0 + 30.0 / 330.0) / 3.0;
  const double d3 = std::max({std::abs(rep.mae_kwp - mae), std::abs(rep.mape_pct - mape),
                              std::abs(rep.within_margin_fraction - 1.0)});
  const bool literal = std::abs(rep.mae_kwp - 16.667) < 5e-4 && std::abs(rep.mape_pct - 7.815) < 5e-4;

  // 100 regions with injected multiplicative and additive errors.
  std::mt19937_64 rng(100);
  std::uniform_real_distribution<double> cap(50.0, 1500.0), mult(0.7, 1.3), add(-20.0, 20.0);
  std::vector<double> rec, pred;
  for (int i = 0; i < 100; ++i) {
    rec.push_back(cap(rng));
    pred.push_back(std::max(1.0, rec.back() * mult(rng) + add(rng)));
  }
  const auto big = capacity_validation_report(values(pred), values(rec), 25.0);
  long double mr = 0, mp = 0;
  for (int i = 0; i < 100; ++i) mr += rec[i], mp += pred[i];
  mr /= 100;
  mp /= 100;
  long double ss_res = 0, ss_tot = 0, sxy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < 100; ++i) {
    ss_res += (rec[i] - pred[i]) * (long double)(rec[i] - pred[i]);
    ss_tot += (rec[i] - mr) * (rec[i] - mr);
    sxy += (rec[i] - mr) * (pred[i] - mp);
    sxx += (rec[i] - mr) * (rec[i] - mr);
    syy += (pred[i] - mp) * (pred[i] - mp);
  }
  const double r2 = static_cast<double>(1.0L - ss_res / ss_tot);
  const double r2_line = static_cast<double>(sxy * sxy / (sxx * syy));
  const double dr = std::max(std::abs(big.r2 - r2), std::abs(big.r2_regression - r2_line));
  return {d3 <= 1e-6 && literal && dr <= 1e-9,
          fmt::format("MAE {:.6f}, MAPE {:.6f}, within {:.3f}; 100-region R^2 {:.9f} (oracle {:.9f}), line R^2 "
                      "{:.9f} (oracle {:.9f})",
                      rep.mae_kwp, rep.mape_pct, rep.within_margin_fraction, big.r2, r2, big.r2_regression, r2_line)};
}

std::map<std::string, std::string> read_tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    out[fs::relative(e.path(), dir).generic_string()] = ss.str();
  }
  return out;
}

// 8. End-to-end determinism through the CLI.
Outcome criterion8() {
  testutil::TempDir dir("accept8");
  const fs::path bundled = fs::path(PVPARAM_SOURCE_DIR) / "data" / "demo";
  fs::path scene = dir / "scene";
  fs::create_directories(scene);
  if (fs::exists(bundled / "demo.cfg")) {
    for (const char* f : {"mask.pgm", "mask.pgw", "pointcloud.csv", "regions.geojson", "recorded.csv", "weather.csv",
                          "demo.cfg"}) {
      fs::copy_file(bundled / f, scene / f);
    }
  } else {
    demo::write_scene(scene);
  }
  const auto t0 = Clock::now();
  int codes[2];
  for (int k = 0; k < 2; ++k) {
    const std::string cmd = fmt::format("\"{}\" run --config \"{}\" --seed 42 --out \"{}\" > \"{}\" 2>&1", PVPARAM_CLI,
                                        (scene / "demo.cfg").string(), (dir / fmt::format("out{}", k)).string(),
                                        (dir / fmt::format("log{}.txt", k)).string());
    codes[k] = std::system(cmd.c_str());
  }
  const double secs = seconds_since(t0);
  if (codes[0] != 0 || codes[1] != 0) return {false, fmt::format("CLI exit codes {} and {}", codes[0], codes[1])};
  const auto a = read_tree(dir / "out0"), b = read_tree(dir / "out1");
  int compared = 0;
  std::string diff;
  for (const auto& [name, bytes] : a) {
    const bool data = name.ends_with(".geojson") || name.ends_with(".csv") || name == "manifest.txt";
    if (!data) continue;
    ++compared;
    const auto it = b.find(name);
    if (it == b.end() || it->second != bytes) diff += " " + name;
  }
  const bool have_all = a.count("pv_layer.geojson") && a.count("region_capacity.csv") && a.count("manifest.txt");
  return {diff.empty() && have_all && a.size() == b.size() && secs <= 120.0,
          fmt::format("{} output files byte-identical across two runs in {:.2f} s{}", compared, secs,
                      diff.empty() ? "" : "; differing:" + diff)};
}

PVSystemRecord building(std::string id, double tilt, double az, double cap) {
  PVSystemRecord s;
  s.id = std::move(id);
  s.footprint = testutil::rect(0, 0, 6, 4, s.id);
  s.orientation = {tilt, az, OrientationConfidence::ok};
  s.capacity_w = cap;
  return s;
}

// 9. Baseline 1 against the configuration-aware aggregate.
Outcome criterion9() {
  const Site site{51.44, 5.47};
  const auto wx = synthetic_clear_sky_weather(site, std::chrono::sys_days{std::chrono::year{2022} / 6 / 21}, 3);
  const std::vector<PVSystemRecord> systems{building("b1", 20, 90, 4000), building("b2", 30, 135, 3000),
                                            building("b3", 25, 200, 5000), building("b4", 40, 270, 3500),
                                            building("b5", 15, 315, 2500)};
  std::vector<PowerSeries> per;
  for (const auto& s : systems) per.push_back(simulate_upper_bound_profile(s, wx, site));
  const PowerSeries aware = aggregate_profiles(per);
  const PowerSeries b1 = baseline_scenario_profile(systems, wx, site, BaselineScenario::baseline1);
  const double peak_aware = *std::max_element(aware.values_wh.begin(), aware.values_wh.end());
  const double peak_b1 = *std::max_element(b1.values_wh.begin(), b1.values_wh.end());

  // Every building collapses onto the same south-facing 35 degree profile.
  bool collapse = true;
  for (const auto& s : systems) {
    PVSystemRecord moved = s;
    moved.orientation = {35.0, 180.0, OrientationConfidence::ok};
    const auto single = baseline_scenario_profile(std::vector{s}, wx, site, BaselineScenario::baseline1);
    collapse &= single.values_wh == simulate_upper_bound_profile(moved, wx, site).values_wh;
  }
  PVSystemRecord a = systems[0], b = systems[3];
  b.capacity_w = a.capacity_w;
  const auto pa = baseline_scenario_profile(std::vector{a}, wx, site, BaselineScenario::baseline1);
  const auto pb = baseline_scenario_profile(std::vector{b}, wx, site, BaselineScenario::baseline1);
  collapse &= pa.values_wh == pb.values_wh && band_width_metrics(pa, pb).mapw_pct == 0.0;
  return {peak_b1 > peak_aware && collapse,
          fmt::format("baseline1 peak {:.1f} Wh vs configuration-aware peak {:.1f} Wh; collapse {}", peak_b1,
                      peak_aware, collapse ? "exact" : "broken")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"geometry metrics vs raster oracle", criterion1},
      {"minimal rectangle vs angle sweep", criterion2},
      {"vectorization fidelity", criterion3},
      {"orientation recovery", criterion4},
      {"layout exactness", criterion5},
      {"band and baseline formulas", criterion6},
      {"validation report", criterion7},
      {"end-to-end determinism", criterion8},
      {"baseline mechanism", criterion9},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << fmt::format("{} {}: {} ({})", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail)
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
