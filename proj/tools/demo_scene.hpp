#pragma once

// Synthetic neighbourhood: a PV mask with world file, a roof point cloud,
// four regions with recorded capacities, a week of clear-sky weather and a
// run config that ties them together.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "pvparam/csv.hpp"
#include "pvparam/geojson.hpp"
#include "pvparam/image_io.hpp"
#include "pvparam/orientation.hpp"
#include "pvparam/profile.hpp"
#include "pvparam/raster_vectorize.hpp"

namespace demo {

inline constexpr double gsd_m = 0.2;
inline constexpr int width_px = 400;
inline constexpr int height_px = 300;
inline constexpr double origin_x = 155000.0;
inline constexpr double origin_y = 385000.0;
inline constexpr const char* crs = "EPSG:28992";

struct Roof {
  // Pixel box [r0, r1) x [c0, c1); `notch` cuts the lower-right quarter to make an L.
  int r0, c0, r1, c1;
  bool notch;
  double tilt_deg, azimuth_deg, eave_z;
};

inline const std::vector<Roof>& roofs() {
  static const std::vector<Roof> r = {
      {20, 20, 45, 60, false, 35, 180, 6.0},   {20, 100, 40, 150, false, 20, 90, 7.0},
      {80, 30, 120, 70, true, 30, 200, 5.5},   {70, 110, 95, 135, false, 0, 0, 9.0},
      {160, 220, 190, 280, false, 40, 270, 6.5}, {200, 40, 240, 80, true, 25, 150, 6.0},
      {30, 250, 55, 300, false, 15, 225, 8.0}, {220, 300, 260, 360, false, 30, 135, 7.5},
      {120, 320, 150, 370, false, 10, 0, 6.0},
  };
  return r;
}

inline bool inside(const Roof& roof, int row, int col) {
  if (row < roof.r0 || row >= roof.r1 || col < roof.c0 || col >= roof.c1) return false;
  if (!roof.notch) return true;
  const int rm = (roof.r0 + roof.r1) / 2, cm = (roof.c0 + roof.c1) / 2;
  return !(row >= rm && col >= cm);
}

inline pvparam::AffineTransform transform() { return {gsd_m, 0.0, 0.0, -gsd_m, origin_x, origin_y}; }

// Writes every scene file into `dir` and returns the config path.
inline std::filesystem::path write_scene(const std::filesystem::path& dir, std::uint64_t seed = 7) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::mt19937_64 rng(seed);

  pvparam::GrayImage img{width_px, height_px, std::vector<std::uint8_t>(std::size_t(width_px) * height_px, 0)};
  for (int r = 0; r < height_px; ++r) {
    for (int c = 0; c < width_px; ++c) {
      for (const auto& roof : roofs()) {
        if (inside(roof, r, c)) img.pixels[std::size_t(r) * width_px + c] = 255;
      }
    }
  }
  // Isolated noise pixels.
  std::uniform_int_distribution<int> pick_r(0, height_px - 1), pick_c(0, width_px - 1);
  for (int k = 0; k < 60; ++k) img.pixels[std::size_t(pick_r(rng)) * width_px + pick_c(rng)] = 255;
  pvparam::write_pgm(dir / "mask.pgm", img);
  pvparam::write_world_file(dir / "mask.pgw", transform());

  // Roof points every 0.4 m with jitter; ground at z = 0 elsewhere.
  const auto tf = transform();
  pvparam::PointSet cloud;
  cloud.crs_id = crs;
  std::uniform_real_distribution<double> jitter(-0.15, 0.15);
  std::normal_distribution<double> noise(0.0, 0.03);
  const double step_px = 0.4 / gsd_m;
  for (double r = 0.0; r < height_px; r += step_px) {
    for (double c = 0.0; c < width_px; c += step_px) {
      const double rr = r + jitter(rng) / gsd_m, cc = c + jitter(rng) / gsd_m;
      const int ir = static_cast<int>(std::lround(rr)), ic = static_cast<int>(std::lround(cc));
      if (ir < 0 || ic < 0 || ir >= height_px || ic >= width_px) continue;
      const pvparam::Point2 p = tf.apply({cc, rr});
      double z = 0.0;
      for (const auto& roof : roofs()) {
        if (!inside(roof, ir, ic)) continue;
        const pvparam::Point2 ctr = tf.apply({0.5 * (roof.c0 + roof.c1), 0.5 * (roof.r0 + roof.r1)});
        const double a = roof.azimuth_deg * std::numbers::pi / 180.0;
        const double along = (p.x - ctr.x) * std::sin(a) + (p.y - ctr.y) * std::cos(a);
        z = roof.eave_z - std::tan(roof.tilt_deg * std::numbers::pi / 180.0) * along;
      }
      cloud.points.push_back({p.x, p.y, z + noise(rng)});
    }
  }
  pvparam::write_pointcloud_csv(dir / "pointcloud.csv", cloud);

  // Four quadrants, slightly larger than the image.
  const double x0 = origin_x - 5.0, x1 = origin_x + width_px * gsd_m + 5.0;
  const double y1 = origin_y + 5.0, y0 = origin_y - height_px * gsd_m - 5.0;
  const double xm = 0.5 * (x0 + x1), ym = 0.5 * (y0 + y1);
  const double boxes[4][4] = {{x0, ym, xm, y1}, {xm, ym, x1, y1}, {x0, y0, xm, ym}, {xm, y0, x1, ym}};
  const double recorded[4] = {30.0, 24.5, 9.0, 36.0};
  std::vector<pvparam::NeighborhoodRecord> regions;
  std::string recorded_csv = "region_id,recorded_kwp\n";
  for (int i = 0; i < 4; ++i) {
    pvparam::NeighborhoodRecord rec;
    rec.region_id = fmt::format("N{}", i + 1);
    rec.boundary.id = rec.region_id;
    rec.boundary.crs_id = crs;
    rec.boundary.exterior = {{boxes[i][0], boxes[i][1]}, {boxes[i][2], boxes[i][1]},
                             {boxes[i][2], boxes[i][3]}, {boxes[i][0], boxes[i][3]}};
    pvparam::normalize(rec.boundary);
    regions.push_back(std::move(rec));
    recorded_csv += fmt::format("N{},{}\n", i + 1, pvparam::format_number(recorded[i]));
  }
  pvparam::write_regions_geojson(regions, dir / "regions.geojson");
  pvparam::write_file_atomic(dir / "recorded.csv", recorded_csv);

  const pvparam::Site site{51.44, 5.47};
  using namespace std::chrono;
  pvparam::write_weather_csv(dir / "weather.csv",
                             pvparam::synthetic_clear_sky_weather(site, sys_days{year{2022} / 6 / 15}, 7));

  const fs::path cfg = dir / "demo.cfg";
  pvparam::write_file_atomic(cfg,
                             "# synthetic demo scene\n"
                             "mask = mask.pgm\n"
                             "worldfile = mask.pgw\n"
                             "crs = EPSG:28992\n"
                             "pointcloud = pointcloud.csv\n"
                             "regions = regions.geojson\n"
                             "recorded = recorded.csv\n"
                             "weather = weather.csv\n"
                             "lat = 51.44\n"
                             "lon = 5.47\n"
                             "shading-derate = 0.8\n"
                             "seed = 42\n"
                             "grid-alignment = downslope\n"
                             "out = out\n");
  return cfg;
}

}  // namespace demo
