#include "pvparam/layout.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include <fmt/format.h>

#include "pvparam/csv.hpp"
#include "pvparam/error.hpp"
#include "pvparam/metrics.hpp"

namespace pvparam {

namespace {

constexpr double deg2rad = std::numbers::pi / 180.0;
constexpr double count_eps = 1e-9;

struct TemplateRow {
  const char* label;
  double height_mm;
  double width_mm;
  int cells;
  Material material;
};

// Row 12 keeps its "_60" label with 72 cells as published.
constexpr TemplateRow builtin_rows[] = {
    {"Mono-c-Si_0.017_128", 2067, 1046, 128, Material::mono_c_si},
    {"Mono-c-Si_0.017_96", 1559, 1046, 96, Material::mono_c_si},
    {"Mono-c-Si_0.022_72", 1620, 980, 72, Material::mono_c_si},
    {"Mono-c-Si_0.025_72", 1924, 954, 72, Material::mono_c_si},
    {"Mono-c-Si_0.026_60", 1620, 980, 60, Material::mono_c_si},
    {"Mono-c-Si_0.026_72", 1893, 971, 72, Material::mono_c_si},
    {"Mono-c-Si_0.026_96", 1943, 1297, 96, Material::mono_c_si},
    {"Mono-c-Si_0.027_60", 1644, 979, 60, Material::mono_c_si},
    {"Mono-c-Si_0.027_72", 1966, 1000, 72, Material::mono_c_si},
    {"Mono-c-Si_0.027_96", 1980, 1300, 96, Material::mono_c_si},
    {"Mono-c-Si_0.028_60", 1680, 996, 60, Material::mono_c_si},
    {"Mono-c-Si_0.028_72", 2000, 1000, 72, Material::mono_c_si},
    {"Mono-c-Si_0.033_60", 1960, 998, 72, Material::mono_c_si},
    {"Multi-c-Si_0.024_72", 1864, 932, 72, Material::multi_c_si},
    {"Multi-c-Si_0.025_72", 1924, 954, 72, Material::multi_c_si},
    {"Multi-c-Si_0.026_60", 1614, 954, 60, Material::multi_c_si},
    {"Multi-c-Si_0.026_72", 1934, 970, 72, Material::multi_c_si},
    {"Multi-c-Si_0.026_96", 1943, 1297, 96, Material::multi_c_si},
    {"Multi-c-Si_0.027_60", 1640, 998, 60, Material::multi_c_si},
    {"Multi-c-Si_0.027_72", 1970, 988, 72, Material::multi_c_si},
    {"Multi-c-Si_0.028_60", 1670, 1000, 60, Material::multi_c_si},
    {"Multi-c-Si_0.028_72", 1994, 1000, 72, Material::multi_c_si},
    {"Multi-c-Si_0.033_60", 1960, 998, 60, Material::multi_c_si},
};

// A grid anchored at `origin` stepping along the unit vectors p and q.
struct GridFrame {
  Point2 origin;
  Point2 p;
  Point2 q;
  double size_p = 0.0;
  double size_q = 0.0;
  double pitch_p = 0.0;
  double pitch_q = 0.0;
  int count_p = 0;
  int count_q = 0;
  bool gapless = true;
};

struct GridCell {
  int i = 0;
  int j = 0;
  Quad quad;
  double covered = 0.0;
};

// Area of ring ∩ convex window (Sutherland-Hodgman). The sign follows the
// ring orientation, so holes subtract.
double clipped_signed_area(const RingPoints& ring, const Quad& window) {
  std::vector<Point2> poly(ring.begin(), ring.end());
  std::vector<Point2> next;
  for (std::size_t e = 0; e < 4 && !poly.empty(); ++e) {
    const Point2 a = window[e];
    const Point2 b = window[(e + 1) % 4];
    const Point2 ab = b - a;
    auto side = [&](Point2 p) { return cross(ab, p - a); };
    next.clear();
    for (std::size_t k = 0; k < poly.size(); ++k) {
      const Point2 cur = poly[k];
      const Point2 prev = poly[(k + poly.size() - 1) % poly.size()];
      const double sc = side(cur);
      const double sp = side(prev);
      if (sc >= 0.0) {
        if (sp < 0.0) next.push_back(prev + (sp / (sp - sc)) * (cur - prev));
        next.push_back(cur);
      } else if (sp >= 0.0) {
        next.push_back(prev + (sp / (sp - sc)) * (cur - prev));
      }
    }
    poly.swap(next);
  }
  return poly.size() < 3 ? 0.0 : signed_ring_area(poly);
}

double covered_area(std::span<const RingPoints> rings, const Quad& cell) {
  double total = 0.0;
  for (const auto& ring : rings) total += clipped_signed_area(ring, cell);
  return std::max(total, 0.0);
}

// Corners in grid order p0q0, p1q0, p1q1, p0q1.
Quad cell_nodes(const GridFrame& f, int i, int j) {
  const double p0 = i * f.pitch_p;
  const double q0 = j * f.pitch_q;
  // Gapless neighbours share the exact same node coordinates.
  const double p1 = f.gapless ? (i + 1) * f.pitch_p : p0 + f.size_p;
  const double q1 = f.gapless ? (j + 1) * f.pitch_q : q0 + f.size_q;
  return {f.origin + p0 * f.p + q0 * f.q, f.origin + p1 * f.p + q0 * f.q, f.origin + p1 * f.p + q1 * f.q,
          f.origin + p0 * f.p + q1 * f.q};
}

Quad make_cell(const GridFrame& f, int i, int j) {
  Quad quad = cell_nodes(f, i, j);
  if (cross(f.p, f.q) < 0.0) std::swap(quad[1], quad[3]);
  return quad;
}

std::vector<GridCell> accepted_cells(const GridFrame& f, std::span<const RingPoints> rings, double tau) {
  std::vector<GridCell> out;
  const double cell_area = f.size_p * f.size_q;
  for (int j = 0; j < f.count_q; ++j) {
    for (int i = 0; i < f.count_p; ++i) {
      GridCell c{i, j, make_cell(f, i, j), 0.0};
      c.covered = covered_area(rings, c.quad);
      if (c.covered / cell_area >= tau - 1e-12) out.push_back(c);
    }
  }
  return out;
}

struct Axes {
  Point2 anchor;
  Point2 long_dir;
  Point2 short_dir;
  double long_len = 0.0;
  double short_len = 0.0;
};

// The corner with the smallest (x, y) and the two rectangle edges leaving it.
Axes anchored_axes(const OrientedRectangle& mbr) {
  const auto c = mbr.corners();
  std::size_t k = 0;
  for (std::size_t m = 1; m < 4; ++m) {
    const double dx = c[m].x - c[k].x;
    if (dx < -1e-9 || (std::abs(dx) <= 1e-9 && c[m].y < c[k].y)) k = m;
  }
  const Point2 next = c[(k + 1) % 4];
  const Point2 prev = c[(k + 3) % 4];
  // corners() runs long, short, long, short edges starting at corner 0.
  const bool next_is_long = k % 2 == 0;
  const Point2 long_end = next_is_long ? next : prev;
  const Point2 short_end = next_is_long ? prev : next;
  Axes ax;
  ax.anchor = c[k];
  ax.long_len = 2.0 * mbr.half_long;
  ax.short_len = 2.0 * mbr.half_short;
  ax.long_dir = (1.0 / std::max(ax.long_len, 1e-300)) * (long_end - c[k]);
  ax.short_dir = (1.0 / std::max(ax.short_len, 1e-300)) * (short_end - c[k]);
  return ax;
}

GridFrame make_frame(const Axes& ax, double size_long, double size_short, double gap, bool swap_axes) {
  GridFrame f;
  f.origin = ax.anchor;
  f.gapless = gap == 0.0;
  // Swapping moves the foreshortened extent onto the long axis.
  const double len_p = ax.long_len;
  const double len_q = ax.short_len;
  f.p = ax.long_dir;
  f.q = ax.short_dir;
  f.size_p = swap_axes ? size_short : size_long;
  f.size_q = swap_axes ? size_long : size_short;
  f.pitch_p = f.size_p + gap;
  f.pitch_q = f.size_q + gap;
  f.count_p = std::max(1, static_cast<int>(std::ceil(len_p / f.pitch_p - count_eps)));
  f.count_q = std::max(1, static_cast<int>(std::ceil(len_q / f.pitch_q - count_eps)));
  return f;
}

std::vector<RingPoints> oriented_rings(const ArrayPolygon& footprint) {
  std::vector<RingPoints> rings;
  RingPoints ext = footprint.exterior;
  if (signed_ring_area(ext) < 0.0) std::reverse(ext.begin(), ext.end());
  rings.push_back(std::move(ext));
  for (RingPoints hole : footprint.holes) {
    if (signed_ring_area(hole) > 0.0) std::reverse(hole.begin(), hole.end());
    rings.push_back(std::move(hole));
  }
  return rings;
}

// Outline of the union of accepted cells: an edge shared by two accepted,
// touching cells is interior and left out.
std::vector<Segment> union_outline(const GridFrame& f, const std::vector<GridCell>& cells) {
  std::vector<char> taken(static_cast<std::size_t>(f.count_p + 2) * (f.count_q + 2), 0);
  auto slot = [&](int i, int j) -> char& {
    return taken[static_cast<std::size_t>(j + 1) * (f.count_p + 2) + (i + 1)];
  };
  for (const auto& c : cells) slot(c.i, c.j) = 1;
  std::vector<Segment> out;
  for (const auto& c : cells) {
    const Quad q = cell_nodes(f, c.i, c.j);
    const bool shared_below = f.gapless && slot(c.i, c.j - 1);
    const bool shared_right = f.gapless && slot(c.i + 1, c.j);
    const bool shared_above = f.gapless && slot(c.i, c.j + 1);
    const bool shared_left = f.gapless && slot(c.i - 1, c.j);
    if (!shared_below) out.push_back({q[0], q[1]});
    if (!shared_right) out.push_back({q[1], q[2]});
    if (!shared_above) out.push_back({q[2], q[3]});
    if (!shared_left) out.push_back({q[3], q[0]});
  }
  return out;
}

// Union of accepted cells traced in grid-index space, so touching cells
// merge exactly instead of relying on floating-point overlay.
geom::MultiPolygon grid_union(const GridFrame& f, const std::vector<GridCell>& cells) {
  geom::MultiPolygon out;
  if (cells.empty()) return out;
  if (!f.gapless) {
    for (const auto& c : cells) out.push_back(make_rectangle(c.quad));
    return out;
  }
  using Node = std::pair<int, int>;
  std::set<Node> taken;
  for (const auto& c : cells) taken.insert({c.i, c.j});
  // Boundary edges, counterclockwise around each cell in index space.
  std::map<Node, std::vector<Node>> outgoing;
  std::size_t edge_count = 0;
  for (const auto& c : cells) {
    const std::array<Node, 4> v{Node{c.i, c.j}, Node{c.i + 1, c.j}, Node{c.i + 1, c.j + 1}, Node{c.i, c.j + 1}};
    const std::array<Node, 4> nb{Node{c.i, c.j - 1}, Node{c.i + 1, c.j}, Node{c.i, c.j + 1}, Node{c.i - 1, c.j}};
    for (int e = 0; e < 4; ++e) {
      if (taken.count(nb[e])) continue;
      outgoing[v[e]].push_back(v[(e + 1) % 4]);
      ++edge_count;
    }
  }
  // Chain edges into loops; at a pinch vertex take the leftmost turn so
  // diagonal neighbours stay separate loops.
  std::vector<std::vector<Node>> loops;
  while (edge_count > 0) {
    auto it = outgoing.begin();
    while (it->second.empty()) ++it;
    const Node start = it->first;
    std::vector<Node> loop{start};
    Node cur = start;
    Node dir{0, 0};
    for (;;) {
      auto& outs = outgoing[cur];
      std::size_t pick = 0;
      if (outs.size() > 1) {
        int best_turn = -2;
        for (std::size_t k = 0; k < outs.size(); ++k) {
          const Node d{outs[k].first - cur.first, outs[k].second - cur.second};
          const int turn = dir.first * d.second - dir.second * d.first;
          if (turn > best_turn) {
            best_turn = turn;
            pick = k;
          }
        }
      }
      const Node next = outs[pick];
      outs.erase(outs.begin() + static_cast<std::ptrdiff_t>(pick));
      --edge_count;
      dir = {next.first - cur.first, next.second - cur.second};
      cur = next;
      if (cur == start) break;
      loop.push_back(cur);
    }
    loops.push_back(std::move(loop));
  }
  auto index_area = [](const std::vector<Node>& loop) {
    long long s = 0;
    for (std::size_t k = 0; k < loop.size(); ++k) {
      const Node a = loop[k], b = loop[(k + 1) % loop.size()];
      s += static_cast<long long>(a.first) * b.second - static_cast<long long>(b.first) * a.second;
    }
    return 0.5 * static_cast<double>(s);
  };
  auto inside = [](const std::vector<Node>& loop, double x, double y) {
    bool in = false;
    for (std::size_t k = 0, m = loop.size() - 1; k < loop.size(); m = k++) {
      const double xi = loop[k].first, yi = loop[k].second, xj = loop[m].first, yj = loop[m].second;
      if ((yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi) in = !in;
    }
    return in;
  };
  auto to_map = [&](const std::vector<Node>& loop) {
    RingPoints ring;
    for (const auto& n : loop) ring.push_back(f.origin + (n.first * f.pitch_p) * f.p + (n.second * f.pitch_q) * f.q);
    return ring;
  };
  std::vector<std::size_t> shells, holes;
  for (std::size_t k = 0; k < loops.size(); ++k) (index_area(loops[k]) > 0.0 ? shells : holes).push_back(k);
  std::vector<ArrayPolygon> parts(shells.size());
  for (std::size_t s = 0; s < shells.size(); ++s) parts[s].exterior = to_map(loops[shells[s]]);
  for (std::size_t h : holes) {
    // A point just inside the cell bordering the hole's first edge.
    const Node a = loops[h][0], b = loops[h][1];
    const double mx = 0.5 * (a.first + b.first) - 0.25 * (b.second - a.second);
    const double my = 0.5 * (a.second + b.second) + 0.25 * (b.first - a.first);
    std::size_t owner = shells.size();
    double owner_area = 0.0;
    for (std::size_t s = 0; s < shells.size(); ++s) {
      const double ar = index_area(loops[shells[s]]);
      if (inside(loops[shells[s]], mx, my) && (owner == shells.size() || ar < owner_area)) {
        owner = s;
        owner_area = ar;
      }
    }
    if (owner < shells.size()) parts[owner].holes.push_back(to_map(loops[h]));
  }
  for (auto& part : parts) {
    normalize(part);
    for (auto& poly : to_multi(part)) out.push_back(std::move(poly));
  }
  return out;
}

struct Candidate {
  GridFrame frame;
  std::vector<GridCell> cells;
  double score = 0.0;
};

Candidate evaluate_candidate(const ArrayPolygon& footprint, std::span<const RingPoints> rings,
                             std::span<const Segment> footprint_outline, const Axes& axes,
                             const CellDimensions& cell, bool swap_axes, const LayoutParams& params,
                             double hd_scale) {
  Candidate best;
  const int n = std::max(1, params.offset_sweep);
  bool have = false;
  for (int s = 0; s < n; ++s) {
    for (int t = 0; t < n; ++t) {
      GridFrame f = make_frame(axes, cell.along_mbr_long_m, cell.along_mbr_short_m, cell.gap_m, swap_axes);
      if (s > 0) {
        f.origin = f.origin - (static_cast<double>(s) / n * f.pitch_p) * f.p;
        ++f.count_p;
      }
      if (t > 0) {
        f.origin = f.origin - (static_cast<double>(t) / n * f.pitch_q) * f.q;
        ++f.count_q;
      }
      Candidate c;
      c.frame = f;
      c.cells = accepted_cells(f, rings, params.coverage_tau);
      if (!c.cells.empty()) {
        double inter = 0.0;
        for (const auto& gc : c.cells) inter += gc.covered;
        const double layout_area = static_cast<double>(c.cells.size()) * f.size_p * f.size_q;
        const double uni = layout_area + footprint.area_m2 - inter;
        const double iou = uni > 0.0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
        const auto outline = union_outline(f, c.cells);
        const double hd = hausdorff_distance(outline, footprint_outline, params.hd_step_m) / hd_scale;
        c.score = iou / (1.0 + hd);
      }
      if (!have || c.score > best.score + 1e-9 ||
          (std::abs(c.score - best.score) <= 1e-9 && c.cells.size() > best.cells.size())) {
        best = std::move(c);
        have = true;
      }
    }
  }
  return best;
}

}  // namespace

std::string_view to_string(Material material) {
  return material == Material::mono_c_si ? "Mono-c-Si" : "Multi-c-Si";
}

Material parse_material(std::string_view text) {
  if (text == "Mono-c-Si") return Material::mono_c_si;
  if (text == "Multi-c-Si") return Material::multi_c_si;
  throw FormatError(fmt::format("unknown module material '{}'", text));
}

std::string_view to_string(ModuleOrientation orientation) {
  return orientation == ModuleOrientation::portrait ? "portrait" : "landscape";
}

ModuleOrientation parse_module_orientation(std::string_view text) {
  if (text == "portrait") return ModuleOrientation::portrait;
  if (text == "landscape") return ModuleOrientation::landscape;
  throw FormatError(fmt::format("unknown module orientation '{}'", text));
}

double default_rated_power_w(double height_mm, double width_mm, Material material) {
  const double efficiency = material == Material::mono_c_si ? 0.20 : 0.18;
  return height_mm * width_mm * 1e-6 * 1000.0 * efficiency;
}

std::vector<ModuleTemplate> builtin_module_templates() {
  std::vector<ModuleTemplate> out;
  int index = 0;
  for (const auto& row : builtin_rows) {
    out.push_back({index++, row.label, row.height_mm, row.width_mm, row.cells, row.material,
                   default_rated_power_w(row.height_mm, row.width_mm, row.material)});
  }
  return out;
}

std::vector<ModuleTemplate> load_module_templates_csv(const std::filesystem::path& path) {
  const CsvTable t =
      read_csv(path, {"index", "label", "height_mm", "width_mm", "cell_count", "material", "rated_power_w"});
  const auto ci = t.column("index"), cl = t.column("label"), ch = t.column("height_mm"), cw = t.column("width_mm"),
             cc = t.column("cell_count"), cm = t.column("material"), cp = t.column("rated_power_w");
  std::vector<ModuleTemplate> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto where = fmt::format("{}:{}", path.string(), t.lines[r]);
    ModuleTemplate m;
    m.index = static_cast<int>(t.number(r, ci));
    m.label = t.rows[r][cl];
    m.height_mm = t.number(r, ch);
    m.width_mm = t.number(r, cw);
    m.cell_count = static_cast<int>(t.number(r, cc));
    m.material = parse_material(t.rows[r][cm]);
    m.rated_power_w =
        t.rows[r][cp].empty() ? default_rated_power_w(m.height_mm, m.width_mm, m.material) : t.number(r, cp);
    if (!(m.height_mm > 0.0 && m.width_mm > 0.0 && m.cell_count > 0 && m.rated_power_w > 0.0)) {
      throw FormatError(where + ": template dimensions, cell count and power must be positive");
    }
    for (const auto& prev : out) {
      if (prev.index == m.index) throw FormatError(where + ": duplicate template index");
    }
    out.push_back(std::move(m));
  }
  if (out.empty()) throw FormatError(path.string() + ": no templates");
  return out;
}

CellDimensions plan_cell_dimensions(const ModuleTemplate& module, ModuleOrientation orientation, double tilt_deg,
                                    double gap_m) {
  if (!(tilt_deg >= 0.0 && tilt_deg < 90.0)) {
    throw InvalidArgument(fmt::format("tilt {} deg outside [0, 90)", tilt_deg));
  }
  if (!(gap_m >= 0.0)) throw InvalidArgument("gap_m must be >= 0");
  const double c = std::cos(tilt_deg * deg2rad);
  const double h = module.height_mm / 1000.0;
  const double w = module.width_mm / 1000.0;
  CellDimensions cell;
  cell.orientation = orientation;
  cell.gap_m = gap_m;
  if (orientation == ModuleOrientation::portrait) {
    cell.along_mbr_long_m = w;
    cell.along_mbr_short_m = h * c;
  } else {
    cell.along_mbr_long_m = h;
    cell.along_mbr_short_m = w * c;
  }
  return cell;
}

std::vector<Quad> place_virtual_grid(const ArrayPolygon& footprint, const OrientedRectangle& mbr,
                                     const CellDimensions& cell, double coverage_tau) {
  if (!(coverage_tau > 0.0 && coverage_tau <= 1.0)) throw InvalidArgument("coverage_tau must be in (0, 1]");
  if (!(cell.along_mbr_long_m > 0.0 && cell.along_mbr_short_m > 0.0)) {
    throw InvalidArgument("cell extents must be positive");
  }
  const Axes axes = anchored_axes(mbr);
  if (cell.along_mbr_long_m > axes.long_len + count_eps && cell.along_mbr_short_m > axes.short_len + count_eps) {
    return {};
  }
  const auto rings = oriented_rings(footprint);
  const GridFrame f = make_frame(axes, cell.along_mbr_long_m, cell.along_mbr_short_m, cell.gap_m, false);
  std::vector<Quad> out;
  for (const auto& c : accepted_cells(f, rings, coverage_tau)) out.push_back(c.quad);
  return out;
}

ModuleLayout infer_best_layout(const ArrayPolygon& footprint, double tilt_deg, std::span<const ModuleTemplate> templates,
                               const LayoutParams& params) {
  if (!(tilt_deg >= 0.0 && tilt_deg < 90.0)) {
    throw InvalidArgument(fmt::format("tilt {} deg outside [0, 90)", tilt_deg));
  }
  if (!(params.coverage_tau > 0.0 && params.coverage_tau <= 1.0)) {
    throw InvalidArgument("coverage_tau must be in (0, 1]");
  }
  if (footprint.exterior.size() < 3 || !(footprint.area_m2 > 0.0)) {
    throw InvalidArgument(fmt::format("footprint '{}' is empty", footprint.id));
  }
  std::vector<ModuleTemplate> ordered(templates.begin(), templates.end());
  std::stable_sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) { return a.index < b.index; });

  const OrientedRectangle mbr = minimal_area_rectangle(footprint.exterior);
  const Axes axes = anchored_axes(mbr);
  const auto rings = oriented_rings(footprint);
  const geom::MultiPolygon fp_shape = to_multi(footprint);
  const auto fp_outline = boundary_segments(fp_shape);
  const double hd_scale = params.normalize_hd ? std::hypot(axes.long_len, axes.short_len) : 1.0;

  // Foreshortened extent follows the rectangle axis nearest downslope.
  bool swap_axes = false;
  if (params.alignment == GridAlignment::downslope && params.downslope_azimuth_deg) {
    const double az = *params.downslope_azimuth_deg * deg2rad;
    const Point2 down{std::sin(az), std::cos(az)};
    swap_axes = std::abs(dot(down, axes.long_dir)) > std::abs(dot(down, axes.short_dir)) + 1e-12;
  }

  ModuleLayout best;
  Candidate best_candidate;
  bool have = false;
  int evaluated = 0;
  for (const auto& module : ordered) {
    for (ModuleOrientation orient : {ModuleOrientation::portrait, ModuleOrientation::landscape}) {
      ++evaluated;
      const CellDimensions cell = plan_cell_dimensions(module, orient, tilt_deg, params.gap_m);
      Candidate c = evaluate_candidate(footprint, rings, fp_outline, axes, cell, swap_axes, params, hd_scale);
      const bool better = !have || c.score > best_candidate.score + 1e-9 ||
                          (std::abs(c.score - best_candidate.score) <= 1e-9 &&
                           c.cells.size() > best_candidate.cells.size());
      if (better) {
        best_candidate = std::move(c);
        best.template_index = module.index;
        best.template_label = module.label;
        best.orientation = orient;
        best.cell = cell;
        best.capacity_w = module.rated_power_w;
        have = true;
      }
    }
  }
  best.candidates_evaluated = evaluated;
  if (!have) return best;

  for (const auto& c : best_candidate.cells) best.accepted_cells.push_back(c.quad);
  best.module_count = static_cast<int>(best.accepted_cells.size());
  best.capacity_w *= best.module_count;
  if (best.module_count == 0) {
    best.score = 0.0;
    return best;
  }
  best.layout_polygon = grid_union(best_candidate.frame, best_candidate.cells);
  ScoreOptions opts;
  opts.hd_step_m = params.hd_step_m;
  if (params.normalize_hd) opts.hd_normalizer = hd_scale;
  best.score = matching_score(best.layout_polygon, fp_shape, opts);
  return best;
}

double layout_capacity(const ModuleLayout& layout, const ModuleTemplate& module) {
  if (layout.template_index != module.index) {
    throw InvalidArgument(fmt::format("layout uses template {} but template {} was given", layout.template_index,
                                      module.index));
  }
  return layout.module_count * module.rated_power_w;
}

}  // namespace pvparam
