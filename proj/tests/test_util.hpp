#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "pvparam/csv.hpp"
#include "pvparam/geometry.hpp"
#include "pvparam/raster_vectorize.hpp"

namespace testutil {

// Fresh directory removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("pvparam_" + tag + "_" + std::to_string(rd()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline pvparam::ArrayPolygon polygon(std::vector<pvparam::Point2> exterior, std::vector<pvparam::RingPoints> holes = {},
                                     std::string id = "p", std::string crs = "EPSG:28992") {
  pvparam::ArrayPolygon p;
  p.id = std::move(id);
  p.exterior = std::move(exterior);
  p.holes = std::move(holes);
  p.crs_id = std::move(crs);
  pvparam::normalize(p);
  return p;
}

inline pvparam::ArrayPolygon rect(double x0, double y0, double x1, double y1, std::string id = "p") {
  return polygon({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}, {}, std::move(id));
}

// Mask with identity-like transform: GSD `gsd`, north-up.
inline pvparam::GeoreferencedMask blank_mask(int width, int height, double gsd = 1.0) {
  pvparam::GeoreferencedMask m;
  m.width = width;
  m.height = height;
  m.bits.assign(static_cast<std::size_t>(width) * height, 0);
  m.transform = {gsd, 0.0, 0.0, -gsd, 1000.0, 2000.0};
  m.crs_id = "EPSG:28992";
  return m;
}

inline void fill(pvparam::GeoreferencedMask& m, int r0, int c0, int r1, int c1, std::uint8_t v = 1) {
  for (int r = r0; r < r1; ++r) {
    for (int c = c0; c < c1; ++c) m.bits[static_cast<std::size_t>(r) * m.width + c] = v;
  }
}

inline std::vector<pvparam::RingPoints> rings_of(const pvparam::ArrayPolygon& p) {
  std::vector<pvparam::RingPoints> out{p.exterior};
  out.insert(out.end(), p.holes.begin(), p.holes.end());
  return out;
}

}  // namespace testutil
