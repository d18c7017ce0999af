#pragma once

// End-to-end orchestration: vectorize -> orient -> layout -> capacity, with
// optional validation and profile stages, per-stage input hashing so
// unchanged stages are skipped, atomic writes and a run manifest.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "pvparam/error.hpp"
#include "pvparam/geojson.hpp"
#include "pvparam/layout.hpp"
#include "pvparam/metrics.hpp"
#include "pvparam/orientation.hpp"
#include "pvparam/profile.hpp"
#include "pvparam/raster_vectorize.hpp"
#include "pvparam/system.hpp"

namespace pvparam {

inline constexpr const char* unassigned_region_id = "_unassigned";
inline constexpr const char* pvparam_version = "0.1.0";

/// Per-region capacity in kWp, in region order, followed by
/// "_unassigned" when some centroid lies in no region. A centroid inside
/// several regions goes to the smallest one and adds a warning. Throws
/// InvalidArgument on CRS mismatch.
std::vector<RegionValue> aggregate_by_neighborhood(std::span<const PVSystemRecord> systems,
                                                   std::span<const NeighborhoodRecord> regions,
                                                   std::vector<std::string>* warnings = nullptr);

/// `region_id,recorded_kwp`.
std::vector<RegionValue> read_recorded_csv(const std::filesystem::path& path);
/// `region_id,predicted_kwp`.
std::vector<RegionValue> read_region_capacity_csv(const std::filesystem::path& path);
void write_region_capacity_csv(const std::filesystem::path& path, std::span<const RegionValue> values);

/// `id,tilt_deg,azimuth_deg,confidence,method,inliers,clipped_points,rms_residual_m`.
struct OrientationRow {
  std::string id;
  ArrayOrientation result;
};
void write_orientations_csv(const std::filesystem::path& path, std::span<const OrientationRow> rows);
std::vector<OrientationRow> read_orientations_csv(const std::filesystem::path& path);

/// Lowercase hex SHA-256 of a file's bytes. Throws IoError.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_text(std::string_view text);

/// Everything `run` needs. Keys in the config file mirror the CLI flags
/// (`mask`, `worldfile`, `pointcloud`, `margin-pct`, ...).
struct PipelineConfig {
  std::filesystem::path mask;
  std::filesystem::path worldfile;
  std::filesystem::path pointcloud;
  std::filesystem::path regions;
  std::filesystem::path recorded;
  std::filesystem::path weather;
  std::filesystem::path lower;
  std::filesystem::path templates;
  std::filesystem::path out = "out";
  std::string crs;
  std::optional<std::uint64_t> seed;
  int threshold = 128;
  double margin_pct = 25.0;
  std::optional<double> max_system_kwp;

  RefineParams refine;
  FitParams fit;
  LayoutParams layout;
  ModelParams model;
  double eps_power_wh = 1.0;
  std::optional<double> lat_deg;
  std::optional<double> lon_deg;
  std::optional<double> shading_derate;
};

/// Flat `key = value` lines; `#` starts a comment. Unknown keys throw
/// FormatError.
std::map<std::string, std::string> parse_config_text(const std::string& text, const std::string& source);

/// Applies `entries` on top of `config`. Relative paths are resolved
/// against `base_dir`.
void apply_config(PipelineConfig& config, const std::map<std::string, std::string>& entries,
                  const std::filesystem::path& base_dir = {});

PipelineConfig load_pipeline_config(const std::filesystem::path& path);

/// Every effective parameter as key -> value text.
std::map<std::string, std::string> config_snapshot(const PipelineConfig& config);

/// Error raised inside a pipeline stage; what() starts with "[stage] ".
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message);
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct PipelineResult {
  std::vector<std::string> stages_run;
  std::vector<std::string> stages_skipped;
  std::vector<std::filesystem::path> outputs;
  std::vector<std::string> warnings;
};

/// Runs every configured stage. Throws StageError.
PipelineResult run_pipeline(const PipelineConfig& config, std::ostream& log);

/// Loads the config, runs, reports to `log`; returns a process exit code.
int run_pipeline(const std::filesystem::path& config_path, std::ostream& log);

/// Builds the system records for a set of footprints (orient + layout +
/// capacity), as the pipeline does.
std::vector<PVSystemRecord> build_system_records(std::span<const ArrayPolygon> footprints,
                                                 std::span<const OrientationRow> orientations,
                                                 std::span<const ModuleTemplate> templates,
                                                 const LayoutParams& params);

}  // namespace pvparam
