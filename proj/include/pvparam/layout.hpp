#pragma once

// Module layout inference: standard module templates laid out on a virtual
// grid aligned with the footprint's minimal bounding rectangle, the
// up-slope module side shortened by cos(tilt), candidates ranked by the
// IoU / (1 + HD) matching score.

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pvparam/geometry.hpp"
#include "pvparam/raster_vectorize.hpp"

namespace pvparam {

enum class Material { mono_c_si, multi_c_si };
enum class ModuleOrientation { portrait, landscape };

std::string_view to_string(Material material);
Material parse_material(std::string_view text);
std::string_view to_string(ModuleOrientation orientation);
ModuleOrientation parse_module_orientation(std::string_view text);

struct ModuleTemplate {
  int index = 0;
  std::string label;
  double height_mm = 0.0;
  double width_mm = 0.0;
  int cell_count = 0;
  Material material = Material::mono_c_si;
  double rated_power_w = 0.0;
};

/// Nameplate power used when a template carries none: module area times
/// 1000 W/m^2 times a material efficiency (0.20 mono, 0.18 multi).
double default_rated_power_w(double height_mm, double width_mm, Material material);

/// The 23 standard templates, indices 0..22.
std::vector<ModuleTemplate> builtin_module_templates();

/// Reads `index,label,height_mm,width_mm,cell_count,material,rated_power_w`.
/// An empty rated_power_w falls back to default_rated_power_w.
std::vector<ModuleTemplate> load_module_templates_csv(const std::filesystem::path& path);

/// Plan-view footprint of one grid cell. The foreshortened extent is
/// along_mbr_short_m unless the grid is re-aligned to the downslope axis.
struct CellDimensions {
  double along_mbr_long_m = 0.0;
  double along_mbr_short_m = 0.0;
  ModuleOrientation orientation = ModuleOrientation::portrait;
  double gap_m = 0.0;
};

/// Portrait: (width, height*cos(tilt)); landscape: (height, width*cos(tilt)).
/// Throws InvalidArgument unless 0 <= tilt_deg < 90 and gap_m >= 0.
CellDimensions plan_cell_dimensions(const ModuleTemplate& module, ModuleOrientation orientation, double tilt_deg,
                                    double gap_m = 0.0);

/// Counterclockwise cell corners in map coordinates.
using Quad = std::array<Point2, 4>;

/// Cells of a grid anchored at the rectangle corner with the smallest
/// (x, y), columns stepping along the long axis and rows along the short
/// axis. A cell is kept when at least coverage_tau of its area lies inside
/// the footprint.
std::vector<Quad> place_virtual_grid(const ArrayPolygon& footprint, const OrientedRectangle& mbr,
                                     const CellDimensions& cell, double coverage_tau);

enum class GridAlignment {
  /// Foreshortened extent along the rectangle's short axis.
  mbr_short_axis,
  /// Foreshortened extent along the rectangle axis nearest the downslope
  /// bearing (falls back to mbr_short_axis without one).
  downslope,
};

struct LayoutParams {
  double coverage_tau = 0.5;
  double gap_m = 0.0;
  GridAlignment alignment = GridAlignment::mbr_short_axis;
  std::optional<double> downslope_azimuth_deg;
  /// n > 1 also tries n x n sub-pitch grid phases per candidate.
  int offset_sweep = 1;
  /// Divide HD by the footprint rectangle diagonal before scoring.
  bool normalize_hd = false;
  double hd_step_m = 0.05;
};

struct ModuleLayout {
  int template_index = 0;
  std::string template_label;
  ModuleOrientation orientation = ModuleOrientation::portrait;
  std::vector<Quad> accepted_cells;
  int module_count = 0;
  geom::MultiPolygon layout_polygon;
  double score = 0.0;
  double capacity_w = 0.0;
  int candidates_evaluated = 0;
  CellDimensions cell;
};

/// Tries every template in portrait and landscape and keeps the best score.
/// Scores within 1e-9 are ties, broken by more modules, then lower template
/// index, then portrait.
ModuleLayout infer_best_layout(const ArrayPolygon& footprint, double tilt_deg, std::span<const ModuleTemplate> templates,
                               const LayoutParams& params = {});

/// module_count * rated_power_w. Throws InvalidArgument if the template
/// index differs from the layout's.
double layout_capacity(const ModuleLayout& layout, const ModuleTemplate& module);

}  // namespace pvparam
