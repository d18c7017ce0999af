#include "pvparam/raster_vectorize.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "pvparam/error.hpp"
#include "pvparam/image_io.hpp"

namespace pvparam {

Point2 AffineTransform::invert(Point2 map) const {
  const double det = determinant();
  if (det == 0.0) throw InvalidArgument("affine transform is singular");
  const double dx = map.x - c;
  const double dy = map.y - f;
  return {(e * dx - b * dy) / det, (-d * dx + a * dy) / det};
}

void GeoreferencedMask::validate() const {
  if (width <= 0 || height <= 0) throw InvalidArgument("mask must have positive width and height");
  if (bits.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw InvalidArgument("mask bit count does not match width x height");
  }
  if (transform.determinant() == 0.0) throw InvalidArgument("mask transform is singular");
}

Point2 OrientedRectangle::long_axis() const { return {std::cos(angle), std::sin(angle)}; }
Point2 OrientedRectangle::short_axis() const { return {-std::sin(angle), std::cos(angle)}; }

std::array<Point2, 4> OrientedRectangle::corners() const {
  const Point2 l = half_long * long_axis();
  const Point2 s = half_short * short_axis();
  return {center - l - s, center + l - s, center + l + s, center - l + s};
}

// --- I/O ------------------------------------------------------------------

AffineTransform read_world_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open world file '" + path.string() + "'");
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    const char* begin = line.data() + first;
    const char* end = line.data() + last + 1;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
      throw FormatError("world file '" + path.string() + "': non-numeric line '" + line + "'");
    }
    values.push_back(v);
  }
  if (values.size() != 6) {
    throw FormatError(fmt::format("world file '{}' has {} numeric lines, expected 6", path.string(), values.size()));
  }
  AffineTransform t{values[0], values[1], values[2], values[3], values[4], values[5]};
  if (t.determinant() == 0.0) throw InvalidArgument("world file '" + path.string() + "' has a singular transform");
  return t;
}

void write_world_file(const std::filesystem::path& path, const AffineTransform& t) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write world file '" + path.string() + "'");
  for (double v : {t.a, t.d, t.b, t.e, t.c, t.f}) out << fmt::format("{:.10g}\n", v);
}

GeoreferencedMask load_georeferenced_mask(const std::filesystem::path& image_path,
                                          const std::filesystem::path& worldfile_path, int threshold,
                                          std::string crs_id) {
  if (threshold < 0 || threshold > 255) throw InvalidArgument("threshold must be within 0..255");
  const GrayImage img = read_gray_image(image_path);
  GeoreferencedMask mask;
  mask.width = img.width;
  mask.height = img.height;
  mask.transform = read_world_file(worldfile_path);
  mask.crs_id = std::move(crs_id);
  mask.bits.resize(img.pixels.size());
  std::transform(img.pixels.begin(), img.pixels.end(), mask.bits.begin(),
                 [threshold](std::uint8_t v) { return static_cast<std::uint8_t>(v >= threshold ? 1 : 0); });
  mask.validate();
  return mask;
}

// --- connected components -------------------------------------------------

namespace {

// Labels the set cells of a rows x cols grid. Components come out in
// raster order of their first cell, which is their (min row, min col).
std::vector<std::vector<Pixel>> label_cells(const std::vector<std::uint8_t>& cells, int rows, int cols,
                                            Connectivity connectivity) {
  std::vector<std::vector<Pixel>> components;
  std::vector<std::uint8_t> seen(cells.size(), 0);
  std::vector<Pixel> stack;
  const int reach = connectivity == Connectivity::eight ? 1 : 0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const std::size_t idx = static_cast<std::size_t>(r) * cols + c;
      if (!cells[idx] || seen[idx]) continue;
      std::vector<Pixel> comp;
      seen[idx] = 1;
      stack.push_back({r, c});
      while (!stack.empty()) {
        const Pixel p = stack.back();
        stack.pop_back();
        comp.push_back(p);
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            if (dr == 0 && dc == 0) continue;
            if (reach == 0 && dr != 0 && dc != 0) continue;
            const int nr = p.row + dr;
            const int nc = p.col + dc;
            if (nr < 0 || nc < 0 || nr >= rows || nc >= cols) continue;
            const std::size_t nidx = static_cast<std::size_t>(nr) * cols + nc;
            if (!cells[nidx] || seen[nidx]) continue;
            seen[nidx] = 1;
            stack.push_back({nr, nc});
          }
        }
      }
      std::sort(comp.begin(), comp.end(),
                [](const Pixel& a, const Pixel& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
      components.push_back(std::move(comp));
    }
  }
  return components;
}

}  // namespace

std::vector<PixelComponent> extract_components(const GeoreferencedMask& mask, Connectivity connectivity,
                                               int min_component_px) {
  mask.validate();
  auto groups = label_cells(mask.bits, mask.height, mask.width, connectivity);
  std::vector<PixelComponent> out;
  for (auto& g : groups) {
    if (static_cast<int>(g.size()) < min_component_px) continue;
    out.push_back({static_cast<int>(out.size()), std::move(g)});
  }
  return out;
}

// --- hull and rectangle ---------------------------------------------------

std::vector<Point2> convex_hull(std::span<const Point2> points) {
  std::vector<Point2> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](Point2 a, Point2 b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Point2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const Point2& p : pts) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    const Point2& p = pts[i];
    while (k >= lower && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0.0) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);
  return hull;
}

namespace {

double normalize_angle(double angle) {
  angle = std::fmod(angle, std::numbers::pi);
  if (angle < 0.0) angle += std::numbers::pi;
  if (angle >= std::numbers::pi) angle -= std::numbers::pi;
  return angle;
}

OrientedRectangle rectangle_from_frame(Point2 center, Point2 axis_u, double half_u, double half_v,
                                       double min_extent) {
  OrientedRectangle r;
  r.center = center;
  Point2 long_dir = axis_u;
  double a = half_u;
  double b = half_v;
  if (b > a) {
    long_dir = {-axis_u.y, axis_u.x};
    std::swap(a, b);
  }
  r.half_long = std::max(a, min_extent);
  r.half_short = std::max(b, min_extent);
  r.angle = normalize_angle(std::atan2(long_dir.y, long_dir.x));
  return r;
}

}  // namespace

OrientedRectangle minimal_area_rectangle(std::span<const Point2> points, double min_extent) {
  if (points.empty()) throw InvalidArgument("minimal_area_rectangle needs at least one point");
  const std::vector<Point2> hull = convex_hull(points);
  if (hull.size() == 1) return rectangle_from_frame(hull[0], {1.0, 0.0}, 0.0, 0.0, min_extent);
  if (hull.size() == 2) {
    const Point2 d = hull[1] - hull[0];
    const double len = std::hypot(d.x, d.y);
    return rectangle_from_frame(0.5 * (hull[0] + hull[1]), (1.0 / len) * d, 0.5 * len, 0.0, min_extent);
  }

  const std::size_t n = hull.size();
  auto next = [n](std::size_t i) { return (i + 1) % n; };

  // Calipers: `top` maximises the distance from the current edge, `right`
  // and `left` bound the projection onto the edge direction.
  std::size_t top = 0, right = 0, left = 0;
  double best_area = std::numeric_limits<double>::infinity();
  OrientedRectangle best;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 base = hull[i];
    const Point2 edge = hull[next(i)] - base;
    const double len = std::hypot(edge.x, edge.y);
    const Point2 u = (1.0 / len) * edge;
    const Point2 v{-u.y, u.x};
    auto along = [&](std::size_t k) { return dot(hull[k] - base, u); };
    auto height = [&](std::size_t k) { return dot(hull[k] - base, v); };

    if (i == 0) {
      right = next(i);
      top = right;
    }
    for (std::size_t guard = 0; guard < n && along(next(right)) >= along(right); ++guard) right = next(right);
    if (top == i) top = next(i);
    for (std::size_t guard = 0; guard < n && height(next(top)) >= height(top); ++guard) top = next(top);
    if (i == 0) left = top;
    for (std::size_t guard = 0; guard < n && along(next(left)) <= along(left); ++guard) left = next(left);

    const double lo = along(left);
    const double hi = along(right);
    const double h = height(top);
    const double area = (hi - lo) * h;
    if (area < best_area) {
      best_area = area;
      const Point2 center = base + (0.5 * (lo + hi)) * u + (0.5 * h) * v;
      best = rectangle_from_frame(center, u, 0.5 * (hi - lo), 0.5 * h, min_extent);
    }
  }
  return best;
}

// --- refinement -----------------------------------------------------------

namespace {

struct CoverageCounts {
  double both = 0.0;
  double shape_only = 0.0;
  double pixels_only = 0.0;
  double iou() const {
    const double uni = both + shape_only + pixels_only;
    return uni > 0.0 ? both / uni : 0.0;
  }
};

// Component membership on a window of the pixel grid.
class MembershipGrid {
 public:
  MembershipGrid(const PixelComponent& component, Box2 extent) {
    r0_ = static_cast<int>(std::floor(extent.min.y)) - 1;
    c0_ = static_cast<int>(std::floor(extent.min.x)) - 1;
    rows_ = static_cast<int>(std::ceil(extent.max.y)) + 1 - r0_;
    cols_ = static_cast<int>(std::ceil(extent.max.x)) + 1 - c0_;
    cells_.assign(static_cast<std::size_t>(rows_) * cols_, 0);
    for (const Pixel& p : component.pixels) cells_[index(p.row, p.col)] = 1;
  }

  bool member(int row, int col) const {
    if (row < r0_ || col < c0_ || row >= r0_ + rows_ || col >= c0_ + cols_) return false;
    return cells_[index(row, col)] != 0;
  }

  int row_begin() const { return r0_; }
  int col_begin() const { return c0_; }
  int row_end() const { return r0_ + rows_; }
  int col_end() const { return c0_ + cols_; }

 private:
  std::size_t index(int row, int col) const { return static_cast<std::size_t>(row - r0_) * cols_ + (col - c0_); }

  int r0_ = 0, c0_ = 0, rows_ = 0, cols_ = 0;
  std::vector<std::uint8_t> cells_;
};

struct PixelWindow {
  int r0, r1, c0, c1;  // half-open
};

PixelWindow window_of(const geom::MultiPolygon& shape, const MembershipGrid& grid) {
  const Box2 box = bounding_box(shape);
  return {std::max(grid.row_begin(), static_cast<int>(std::floor(box.min.y))),
          std::min(grid.row_end(), static_cast<int>(std::ceil(box.max.y))),
          std::max(grid.col_begin(), static_cast<int>(std::floor(box.min.x))),
          std::min(grid.col_end(), static_cast<int>(std::ceil(box.max.x)))};
}

// Area (in pixels) of `shape` falling on member / non-member pixels, plus the
// member area outside the shape within the window, from an n x n lattice.
CoverageCounts measure(const geom::MultiPolygon& shape, const MembershipGrid& grid, int n, const PixelWindow& win) {
  CoverageCounts counts;
  const auto rings = boundary_rings(shape);
  const double w = 1.0 / (static_cast<double>(n) * n);
  for (int r = win.r0; r < win.r1; ++r) {
    for (int c = win.c0; c < win.c1; ++c) {
      const bool member = grid.member(r, c);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          const Point2 s{c + (j + 0.5) / n, r + (i + 0.5) / n};
          const bool in = contains_point(std::span<const RingPoints>(rings), s, 0.0);
          if (in && member) counts.both += w;
          else if (in) counts.shape_only += w;
          else if (member) counts.pixels_only += w;
        }
      }
    }
  }
  return counts;
}

// Bounding rectangle of a pixel set: the minimal rectangle of the pixel
// centers, each side pushed out by half the spacing between the outermost
// line of centers and the next one. That is half a pixel on axis-aligned
// sides and close to nothing on sides at irregular angles, where the extreme
// centers already sit on the sampled edge.
OrientedRectangle pixel_rectangle(const std::vector<Pixel>& pixels) {
  std::vector<Point2> pts;
  std::size_t i = 0;
  while (i < pixels.size()) {
    int row = pixels[i].row;
    int lo = pixels[i].col;
    int hi = pixels[i].col;
    for (; i < pixels.size() && pixels[i].row == row; ++i) {
      lo = std::min(lo, pixels[i].col);
      hi = std::max(hi, pixels[i].col);
    }
    pts.push_back({lo + 0.5, row + 0.5});
    if (hi != lo) pts.push_back({hi + 0.5, row + 0.5});
  }
  OrientedRectangle rect = minimal_area_rectangle(pts, 0.0);
  const Point2 u = rect.long_axis(), v = rect.short_axis();
  auto pad = [&](Point2 n) {
    double first = -std::numeric_limits<double>::infinity(), second = first;
    for (const Pixel& p : pixels) {
      const double o = dot(Point2{p.col + 0.5, p.row + 0.5} - rect.center, n);
      if (o > first + 1e-9) {
        second = first;
        first = o;
      } else if (o < first - 1e-9 && o > second) {
        second = o;
      }
    }
    return std::isfinite(second) ? std::min(0.5, 0.5 * (first - second)) : 0.5;
  };
  const double pu = pad(u), mu = pad(-1.0 * u), pv = pad(v), mv = pad(-1.0 * v);
  rect.center = rect.center + (0.5 * (pu - mu)) * u + (0.5 * (pv - mv)) * v;
  rect.half_long += 0.5 * (pu + mu);
  rect.half_short += 0.5 * (pv + mv);
  if (rect.half_short > rect.half_long) {
    std::swap(rect.half_long, rect.half_short);
    rect.angle = std::fmod(rect.angle + 0.5 * std::numbers::pi, std::numbers::pi);
  }
  return rect;
}

geom::MultiPolygon rectangle_shape(const OrientedRectangle& rect) {
  const auto corners = rect.corners();
  geom::MultiPolygon m;
  m.push_back(make_rectangle(corners));
  return m;
}

struct Piece {
  geom::MultiPolygon shape;
  int depth = 0;
};

// Morphological opening with a (2k+1)^2 square. Cells outside the piece do
// not constrain the erosion, so regions touching the piece edge survive;
// slivers narrower than the square vanish.
void open_cells(std::vector<std::uint8_t>& cells, const std::vector<std::uint8_t>& inside, int rows, int cols, int k) {
  auto at = [&](int r, int c) { return static_cast<std::size_t>(r) * cols + c; };
  std::vector<std::uint8_t> eroded(cells.size(), 0);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (!cells[at(r, c)]) continue;
      bool keep = true;
      for (int dr = -k; dr <= k && keep; ++dr) {
        for (int dc = -k; dc <= k; ++dc) {
          const int rr = r + dr, cc = c + dc;
          if (rr < 0 || cc < 0 || rr >= rows || cc >= cols || !inside[at(rr, cc)]) continue;
          if (!cells[at(rr, cc)]) {
            keep = false;
            break;
          }
        }
      }
      eroded[at(r, c)] = keep;
    }
  }
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (!cells[at(r, c)]) continue;
      bool hit = false;
      for (int dr = -k; dr <= k && !hit; ++dr) {
        for (int dc = -k; dc <= k; ++dc) {
          const int rr = r + dr, cc = c + dc;
          if (rr >= 0 && cc >= 0 && rr < rows && cc < cols && eroded[at(rr, cc)]) {
            hit = true;
            break;
          }
        }
      }
      cells[at(r, c)] = hit;
    }
  }
}

// The component without specks and one-pixel spurs, so that stray pixels
// touching it do not inflate its bounding rectangle. Falls back to the full
// set when the opening would remove everything.
std::vector<Pixel> opened_pixels(const std::vector<Pixel>& pixels, int k) {
  if (k <= 0) return pixels;
  int r0 = pixels.front().row, r1 = r0, c0 = pixels.front().col, c1 = c0;
  for (const Pixel& p : pixels) {
    r0 = std::min(r0, p.row), r1 = std::max(r1, p.row);
    c0 = std::min(c0, p.col), c1 = std::max(c1, p.col);
  }
  r0 -= k, c0 -= k, r1 += k, c1 += k;
  const int rows = r1 - r0 + 1, cols = c1 - c0 + 1;
  std::vector<std::uint8_t> cells(static_cast<std::size_t>(rows) * cols, 0);
  const std::vector<std::uint8_t> inside(cells.size(), 1);
  for (const Pixel& p : pixels) cells[static_cast<std::size_t>(p.row - r0) * cols + (p.col - c0)] = 1;
  open_cells(cells, inside, rows, cols, k);
  std::vector<Pixel> out;
  for (const Pixel& p : pixels) {
    if (cells[static_cast<std::size_t>(p.row - r0) * cols + (p.col - c0)]) out.push_back(p);
  }
  return out.empty() ? pixels : out;
}

class Refiner {
 public:
  Refiner(const PixelComponent& component, const MembershipGrid& grid, const RefineParams& params)
      : component_(component), grid_(grid), params_(params) {}

  // `value` is true when `target` holds PV pixels (an added piece) and false
  // when it holds mismatch pixels (a subtracted piece).
  Piece build(const std::vector<Pixel>& target, const geom::MultiPolygon* parent, bool value, int depth) const {
    geom::MultiPolygon piece = rectangle_shape(pixel_rectangle(target));
    snap(piece, params_.snap_grid_px);
    if (parent) piece = intersection(piece, *parent, params_.snap_grid_px);
    Piece out{piece, depth};
    if (piece.empty() || depth >= params_.max_depth) return out;

    const auto children = mismatch_regions(piece, value);
    std::size_t total = 0;
    for (const auto& ch : children) total += ch.size();
    if (children.empty() ||
        static_cast<double>(total) < params_.stop_ratio * static_cast<double>(component_.pixels.size())) {
      return out;
    }

    for (const auto& child : children) {
      Piece sub = build(child, &piece, !value, depth + 1);
      if (sub.shape.empty()) continue;
      const CoverageCounts cov = measure(sub.shape, grid_, params_.coverage_subsamples, window_of(sub.shape, grid_));
      // The child stands for pixels of the opposite value; carve it out only
      // when that is what it mostly covers.
      const double child_kind = value ? cov.shape_only : cov.both;
      const double own_kind = value ? cov.both : cov.shape_only;
      if (child_kind <= own_kind) continue;
      out.shape = difference(out.shape, sub.shape, params_.snap_grid_px);
      out.depth = std::max(out.depth, sub.depth);
    }
    return out;
  }

 private:
  // Connected groups (raster order) of pixels whose centers fall inside
  // `piece` and whose membership differs from `value`.
  std::vector<std::vector<Pixel>> mismatch_regions(const geom::MultiPolygon& piece, bool value) const {
    const PixelWindow win = window_of(piece, grid_);
    const int rows = win.r1 - win.r0;
    const int cols = win.c1 - win.c0;
    if (rows <= 0 || cols <= 0) return {};
    const auto rings = boundary_rings(piece);
    std::vector<std::uint8_t> cells(static_cast<std::size_t>(rows) * cols, 0);
    std::vector<std::uint8_t> inside(cells.size(), 0);
    for (int r = win.r0; r < win.r1; ++r) {
      for (int c = win.c0; c < win.c1; ++c) {
        if (!contains_point(std::span<const RingPoints>(rings), {c + 0.5, r + 0.5}, 1e-9)) continue;
        const std::size_t i = static_cast<std::size_t>(r - win.r0) * cols + (c - win.c0);
        inside[i] = 1;
        if (grid_.member(r, c) != value) cells[i] = 1;
      }
    }
    if (params_.mismatch_opening_px > 0) open_cells(cells, inside, rows, cols, params_.mismatch_opening_px);
    auto groups = label_cells(cells, rows, cols, params_.connectivity);
    std::vector<std::vector<Pixel>> out;
    for (auto& g : groups) {
      if (static_cast<int>(g.size()) < params_.min_mismatch_px) continue;
      for (Pixel& p : g) p = {p.row + win.r0, p.col + win.c0};
      out.push_back(std::move(g));
    }
    return out;
  }

  const PixelComponent& component_;
  const MembershipGrid& grid_;
  const RefineParams& params_;
};

}  // namespace

RefinedComponent refine_component_polygon(const PixelComponent& component, const RefineParams& params) {
  if (component.pixels.empty()) throw InvalidArgument("refine_component_polygon: empty component");
  RefinedComponent result;
  const std::vector<Pixel> core = opened_pixels(component.pixels, params.mismatch_opening_px);
  result.initial_rectangle = pixel_rectangle(core);
  geom::MultiPolygon initial = rectangle_shape(result.initial_rectangle);
  snap(initial, params.snap_grid_px);

  const MembershipGrid grid(component, bounding_box(initial));
  geom::MultiPolygon shape = initial;
  try {
    const Refiner refiner(component, grid, params);
    Piece root = refiner.build(core, nullptr, true, 0);
    if (root.depth > 0) {
      const PixelWindow win = window_of(initial, grid);
      const double refined_iou = measure(root.shape, grid, params.coverage_subsamples, win).iou();
      const double initial_iou = measure(initial, grid, params.coverage_subsamples, win).iou();
      if (refined_iou >= initial_iou) {
        shape = std::move(root.shape);
        result.depth_reached = root.depth;
      }
    }
  } catch (const std::exception& e) {
    shape = initial;
    result.depth_reached = 0;
    result.fallback = true;
    result.warning = fmt::format("component {}: refinement failed ({}), using its bounding rectangle", component.id,
                                 e.what());
  }
  result.parts = from_multi(shape, {}, 0.0);
  if (result.parts.empty()) {
    shape = initial;
    result.parts = from_multi(shape, {}, 0.0);
    result.fallback = true;
    result.warning = fmt::format("component {}: refinement produced an empty shape", component.id);
  }
  result.shape = std::move(shape);
  return result;
}

Point2 pixel_edge_to_map(const AffineTransform& transform, Point2 edge) {
  return transform.apply({edge.x - 0.5, edge.y - 0.5});
}

std::vector<ArrayPolygon> vectorize_mask(const GeoreferencedMask& mask, const RefineParams& params) {
  const auto components = extract_components(mask, params.connectivity, params.min_component_px);
  std::vector<ArrayPolygon> out;
  for (const auto& component : components) {
    const RefinedComponent refined = refine_component_polygon(component, params);
    for (ArrayPolygon part : refined.parts) {
      for (auto& p : part.exterior) p = pixel_edge_to_map(mask.transform, p);
      for (auto& hole : part.holes) {
        for (auto& p : hole) p = pixel_edge_to_map(mask.transform, p);
      }
      normalize(part);
      if (part.area_m2 < params.min_area_m2) continue;
      part.crs_id = mask.crs_id;
      part.id = fmt::format("pv_{:04d}", out.size() + 1);
      out.push_back(std::move(part));
    }
  }
  return out;
}

}  // namespace pvparam
