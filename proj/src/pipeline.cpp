#include "pvparam/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <boost/version.hpp>
#include <Eigen/Core>
#include <fmt/format.h>
#include <openssl/evp.h>

#include "pvparam/csv.hpp"

namespace pvparam {

namespace fs = std::filesystem;

// --- aggregation -----------------------------------------------------------

std::vector<RegionValue> aggregate_by_neighborhood(std::span<const PVSystemRecord> systems,
                                                   std::span<const NeighborhoodRecord> regions,
                                                   std::vector<std::string>* warnings) {
  std::vector<double> sums_w(regions.size(), 0.0);
  double unassigned_w = 0.0;
  bool any_unassigned = false;
  for (const auto& s : systems) {
    const Point2 c = centroid(s.footprint);
    std::optional<std::size_t> chosen;
    int hits = 0;
    for (std::size_t r = 0; r < regions.size(); ++r) {
      if (regions[r].boundary.crs_id != s.footprint.crs_id) {
        throw InvalidArgument(fmt::format("system '{}' CRS '{}' differs from region '{}' CRS '{}'", s.id,
                                          s.footprint.crs_id, regions[r].region_id, regions[r].boundary.crs_id));
      }
      if (!contains_point(regions[r].boundary, c)) continue;
      ++hits;
      if (!chosen || regions[r].boundary.area_m2 < regions[*chosen].boundary.area_m2) chosen = r;
    }
    if (hits > 1 && warnings) {
      warnings->push_back(fmt::format("system '{}' lies in {} overlapping regions; assigned to '{}'", s.id, hits,
                                      regions[*chosen].region_id));
    }
    if (chosen) {
      sums_w[*chosen] += s.capacity_w;
    } else {
      unassigned_w += s.capacity_w;
      any_unassigned = true;
    }
  }
  std::vector<RegionValue> out;
  for (std::size_t r = 0; r < regions.size(); ++r) out.push_back({regions[r].region_id, sums_w[r] / 1000.0});
  if (any_unassigned) out.push_back({unassigned_region_id, unassigned_w / 1000.0});
  return out;
}

namespace {

std::vector<RegionValue> read_region_values(const fs::path& path, const char* value_column) {
  const CsvTable t = read_csv(path, {"region_id", value_column});
  const auto ci = t.column("region_id"), cv = t.column(value_column);
  std::vector<RegionValue> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) out.push_back({t.rows[r][ci], t.number(r, cv)});
  return out;
}

}  // namespace

std::vector<RegionValue> read_recorded_csv(const fs::path& path) { return read_region_values(path, "recorded_kwp"); }

std::vector<RegionValue> read_region_capacity_csv(const fs::path& path) {
  return read_region_values(path, "predicted_kwp");
}

void write_region_capacity_csv(const fs::path& path, std::span<const RegionValue> values) {
  std::string out = "region_id,predicted_kwp\n";
  for (const auto& v : values) out += fmt::format("{},{}\n", v.region_id, format_number(v.kwp, 6));
  write_file_atomic(path, out);
}

void write_orientations_csv(const fs::path& path, std::span<const OrientationRow> rows) {
  std::string out = "id,tilt_deg,azimuth_deg,confidence,method,inliers,clipped_points,rms_residual_m\n";
  for (const auto& r : rows) {
    const auto& o = r.result;
    out += fmt::format("{},{},{},{},{},{},{},{}\n", r.id, format_number(o.estimate.tilt_deg),
                       format_number(o.estimate.azimuth_deg), to_string(o.estimate.confidence), to_string(o.plane.method),
                       o.plane.inlier_count, o.clipped_points, format_number(o.plane.rms_residual_m));
  }
  write_file_atomic(path, out);
}

std::vector<OrientationRow> read_orientations_csv(const fs::path& path) {
  const CsvTable t = read_csv(path, {"id", "tilt_deg", "azimuth_deg", "confidence"});
  const auto ci = t.column("id"), ct = t.column("tilt_deg"), ca = t.column("azimuth_deg"),
             cc = t.column("confidence");
  std::vector<OrientationRow> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    OrientationRow row;
    row.id = t.rows[r][ci];
    row.result.estimate = {t.number(r, ct), t.number(r, ca), parse_confidence(t.rows[r][cc])};
    if (t.has_column("method")) {
      const std::string& m = t.rows[r][t.column("method")];
      row.result.plane.method = m == "least_squares" ? FitMethod::least_squares
                                : m == "ransac_refit" ? FitMethod::ransac_refit
                                                      : FitMethod::fallback;
    }
    if (t.has_column("inliers")) row.result.plane.inlier_count = static_cast<int>(t.number(r, t.column("inliers")));
    if (t.has_column("clipped_points")) {
      row.result.clipped_points = static_cast<std::size_t>(t.number(r, t.column("clipped_points")));
    }
    if (t.has_column("rms_residual_m")) row.result.plane.rms_residual_m = t.number(r, t.column("rms_residual_m"));
    out.push_back(std::move(row));
  }
  return out;
}

// --- hashing ---------------------------------------------------------------

namespace {

std::string sha256_bytes(const void* data, std::size_t size) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data, size, digest, &len, EVP_sha256(), nullptr) != 1) throw Error("SHA-256 computation failed");
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

}  // namespace

std::string sha256_text(std::string_view text) { return sha256_bytes(text.data(), text.size()); }

std::string sha256_file(const fs::path& path) { return sha256_text(read_text_file(path)); }

// --- configuration ---------------------------------------------------------

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "mask", "worldfile", "pointcloud", "regions", "recorded", "weather", "lower", "templates", "out", "crs", "seed",
      "threshold", "margin-pct", "max-system-kwp",
      // vectorize
      "connectivity", "max-depth", "stop-ratio", "min-mismatch-px", "min-component-px", "min-area-m2", "min-extent-m",
      "snap-grid-px", "coverage-subsamples", "mismatch-opening-px",
      // orient
      "min-points", "iterations", "inlier-dist-m", "flat-threshold-deg",
      // layout
      "coverage-tau", "gap-m", "grid-alignment", "offset-sweep", "normalize-hd", "hd-step-m",
      // profile and band metrics
      "derate", "gamma-t", "noct-coeff", "albedo", "eps-power", "lat", "lon", "shading-derate"};
  return keys;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& v) { return parse_number(v, "config key '" + key + "'"); }

int to_int(const std::string& key, const std::string& v) {
  int out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw FormatError(fmt::format("config key '{}': '{}' is not an integer", key, v));
  }
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw FormatError(fmt::format("config key '{}': '{}' is not a non-negative integer", key, v));
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw FormatError(fmt::format("config key '{}': '{}' is not a boolean", key, v));
}

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text, const std::string& source) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw FormatError(fmt::format("{}:{}: expected key = value", source, lineno));
    std::string key = trim(std::string_view(body).substr(0, eq));
    std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.rfind("--", 0) == 0) key.erase(0, 2);
    if (!known_keys().count(key)) throw FormatError(fmt::format("{}:{}: unknown key '{}'", source, lineno, key));
    out[key] = value;
  }
  return out;
}

void apply_config(PipelineConfig& c, const std::map<std::string, std::string>& entries, const fs::path& base_dir) {
  auto path_of = [&](const std::string& v) -> fs::path {
    if (v.empty()) return {};
    fs::path p(v);
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  };
  for (const auto& [k, v] : entries) {
    if (!known_keys().count(k)) throw FormatError(fmt::format("unknown config key '{}'", k));
    if (k == "mask") c.mask = path_of(v);
    else if (k == "worldfile") c.worldfile = path_of(v);
    else if (k == "pointcloud") c.pointcloud = path_of(v);
    else if (k == "regions") c.regions = path_of(v);
    else if (k == "recorded") c.recorded = path_of(v);
    else if (k == "weather") c.weather = path_of(v);
    else if (k == "lower") c.lower = path_of(v);
    else if (k == "templates") c.templates = path_of(v);
    else if (k == "out") c.out = path_of(v);
    else if (k == "crs") c.crs = v;
    else if (k == "seed") c.seed = to_u64(k, v);
    else if (k == "threshold") c.threshold = to_int(k, v);
    else if (k == "margin-pct") c.margin_pct = to_double(k, v);
    else if (k == "max-system-kwp") c.max_system_kwp = v.empty() ? std::nullopt : std::optional(to_double(k, v));
    else if (k == "connectivity") {
      if (v == "4") c.refine.connectivity = Connectivity::four;
      else if (v == "8") c.refine.connectivity = Connectivity::eight;
      else throw FormatError("config key 'connectivity' must be 4 or 8");
    }
    else if (k == "max-depth") c.refine.max_depth = to_int(k, v);
    else if (k == "stop-ratio") c.refine.stop_ratio = to_double(k, v);
    else if (k == "min-mismatch-px") c.refine.min_mismatch_px = to_int(k, v);
    else if (k == "min-component-px") c.refine.min_component_px = to_int(k, v);
    else if (k == "min-area-m2") c.refine.min_area_m2 = to_double(k, v);
    else if (k == "min-extent-m") c.refine.min_extent_m = to_double(k, v);
    else if (k == "snap-grid-px") c.refine.snap_grid_px = to_double(k, v);
    else if (k == "coverage-subsamples") c.refine.coverage_subsamples = to_int(k, v);
    else if (k == "mismatch-opening-px") c.refine.mismatch_opening_px = to_int(k, v);
    else if (k == "min-points") c.fit.min_points = to_int(k, v);
    else if (k == "iterations") c.fit.iterations = to_int(k, v);
    else if (k == "inlier-dist-m") c.fit.inlier_dist_m = to_double(k, v);
    else if (k == "flat-threshold-deg") c.fit.flat_threshold_deg = to_double(k, v);
    else if (k == "coverage-tau") c.layout.coverage_tau = to_double(k, v);
    else if (k == "gap-m") c.layout.gap_m = to_double(k, v);
    else if (k == "grid-alignment") {
      if (v == "mbr_short_axis") c.layout.alignment = GridAlignment::mbr_short_axis;
      else if (v == "downslope") c.layout.alignment = GridAlignment::downslope;
      else throw FormatError("config key 'grid-alignment' must be mbr_short_axis or downslope");
    }
    else if (k == "offset-sweep") c.layout.offset_sweep = to_int(k, v);
    else if (k == "normalize-hd") c.layout.normalize_hd = to_bool(k, v);
    else if (k == "hd-step-m") c.layout.hd_step_m = to_double(k, v);
    else if (k == "derate") c.model.derate = to_double(k, v);
    else if (k == "gamma-t") c.model.gamma_t = to_double(k, v);
    else if (k == "noct-coeff") c.model.noct_coeff = to_double(k, v);
    else if (k == "albedo") c.model.albedo = to_double(k, v);
    else if (k == "eps-power") c.eps_power_wh = to_double(k, v);
    else if (k == "lat") c.lat_deg = to_double(k, v);
    else if (k == "lon") c.lon_deg = to_double(k, v);
    else if (k == "shading-derate") c.shading_derate = v.empty() ? std::nullopt : std::optional(to_double(k, v));
  }
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  PipelineConfig c;
  const auto entries = parse_config_text(read_text_file(path), path.string());
  apply_config(c, entries, path.parent_path());
  return c;
}

std::map<std::string, std::string> config_snapshot(const PipelineConfig& c) {
  auto num = [](double v) { return format_number(v, 9); };
  auto opt = [&](const std::optional<double>& v) { return v ? num(*v) : std::string("none"); };
  // Only file names: the manifest must not depend on where the run lives.
  auto name = [](const fs::path& p) { return p.empty() ? std::string("none") : p.filename().string(); };
  std::map<std::string, std::string> m;
  m["mask"] = name(c.mask);
  m["worldfile"] = name(c.worldfile);
  m["pointcloud"] = name(c.pointcloud);
  m["regions"] = name(c.regions);
  m["recorded"] = name(c.recorded);
  m["weather"] = name(c.weather);
  m["lower"] = name(c.lower);
  m["templates"] = c.templates.empty() ? std::string("builtin") : name(c.templates);
  m["rated-power-default"] = "area_m2 * 1000 W/m2 * efficiency (Mono-c-Si 0.20, Multi-c-Si 0.18)";
  m["crs"] = c.crs.empty() ? "none" : c.crs;
  m["seed"] = c.seed ? std::to_string(*c.seed) : std::string("none");
  m["threshold"] = std::to_string(c.threshold);
  m["margin-pct"] = num(c.margin_pct);
  m["max-system-kwp"] = opt(c.max_system_kwp);
  m["connectivity"] = c.refine.connectivity == Connectivity::four ? "4" : "8";
  m["max-depth"] = std::to_string(c.refine.max_depth);
  m["stop-ratio"] = num(c.refine.stop_ratio);
  m["min-mismatch-px"] = std::to_string(c.refine.min_mismatch_px);
  m["min-component-px"] = std::to_string(c.refine.min_component_px);
  m["min-area-m2"] = num(c.refine.min_area_m2);
  m["min-extent-m"] = num(c.refine.min_extent_m);
  m["snap-grid-px"] = num(c.refine.snap_grid_px);
  m["coverage-subsamples"] = std::to_string(c.refine.coverage_subsamples);
  m["mismatch-opening-px"] = std::to_string(c.refine.mismatch_opening_px);
  m["min-points"] = std::to_string(c.fit.min_points);
  m["iterations"] = std::to_string(c.fit.iterations);
  m["inlier-dist-m"] = num(c.fit.inlier_dist_m);
  m["flat-threshold-deg"] = num(c.fit.flat_threshold_deg);
  m["coverage-tau"] = num(c.layout.coverage_tau);
  m["gap-m"] = num(c.layout.gap_m);
  m["grid-alignment"] = c.layout.alignment == GridAlignment::downslope ? "downslope" : "mbr_short_axis";
  m["offset-sweep"] = std::to_string(c.layout.offset_sweep);
  m["normalize-hd"] = c.layout.normalize_hd ? "true" : "false";
  m["hd-step-m"] = num(c.layout.hd_step_m);
  m["derate"] = num(c.model.derate);
  m["gamma-t"] = num(c.model.gamma_t);
  m["noct-coeff"] = num(c.model.noct_coeff);
  m["albedo"] = num(c.model.albedo);
  m["eps-power"] = num(c.eps_power_wh);
  m["lat"] = opt(c.lat_deg);
  m["lon"] = opt(c.lon_deg);
  m["shading-derate"] = opt(c.shading_derate);
  return m;
}

// --- records ---------------------------------------------------------------

std::vector<PVSystemRecord> build_system_records(std::span<const ArrayPolygon> footprints,
                                                 std::span<const OrientationRow> orientations,
                                                 std::span<const ModuleTemplate> templates,
                                                 const LayoutParams& params) {
  std::map<std::string, const OrientationRow*> by_id;
  for (const auto& o : orientations) by_id[o.id] = &o;
  std::vector<PVSystemRecord> out;
  std::set<std::string> ids;
  for (const auto& fp : footprints) {
    if (!ids.insert(fp.id).second) throw InvalidArgument(fmt::format("duplicate footprint id '{}'", fp.id));
    const auto it = by_id.find(fp.id);
    if (it == by_id.end()) throw InvalidArgument(fmt::format("no orientation for footprint '{}'", fp.id));
    PVSystemRecord s;
    s.id = fp.id;
    s.footprint = fp;
    s.orientation = it->second->result.estimate;
    LayoutParams lp = params;
    const bool usable = s.orientation.confidence == OrientationConfidence::ok ||
                        s.orientation.confidence == OrientationConfidence::flat_roof;
    const double tilt = usable ? s.orientation.tilt_deg : 0.0;
    if (lp.alignment == GridAlignment::downslope && s.orientation.confidence == OrientationConfidence::ok) {
      lp.downslope_azimuth_deg = s.orientation.azimuth_deg;
    } else {
      lp.downslope_azimuth_deg.reset();
    }
    s.layout = infer_best_layout(fp, tilt, templates, lp);
    s.capacity_w = s.layout.capacity_w;
    out.push_back(std::move(s));
  }
  return out;
}

// --- run -------------------------------------------------------------------

StageError::StageError(std::string stage, const std::string& message)
    : Error("[" + stage + "] " + message), stage_(std::move(stage)) {}

namespace {

struct Stage {
  std::string name;
  std::vector<std::pair<std::string, fs::path>> inputs;  // label -> file
  std::map<std::string, std::string> params;
  std::vector<fs::path> outputs;
  std::function<void(std::vector<std::string>& warnings)> body;
};

struct StageCache {
  std::string key;
  std::map<std::string, std::string> output_hashes;
};

std::optional<StageCache> read_cache(const fs::path& file) {
  std::ifstream in(file);
  if (!in) return std::nullopt;
  StageCache c;
  if (!std::getline(in, c.key)) return std::nullopt;
  std::string name, hash;
  while (in >> name >> hash) c.output_hashes[name] = hash;
  return c;
}

class Runner {
 public:
  Runner(const PipelineConfig& config, std::ostream& log) : config_(config), log_(log) {}

  void run(Stage stage) {
    std::string key_text = fmt::format("stage {}\nversion {}\n", stage.name, pvparam_version);
    for (const auto& [k, v] : stage.params) key_text += fmt::format("param {} {}\n", k, v);
    try {
      for (const auto& [label, file] : stage.inputs) {
        if (file.empty()) continue;
        if (!fs::exists(file)) throw IoError(fmt::format("{} file '{}' does not exist", label, file.string()));
        const std::string h = hash_of(file);
        key_text += fmt::format("input {} {}\n", label, h);
        if (!produced_.count(file.lexically_normal().string())) {
          manifest_inputs_[label] = {file.filename().string(), h};
        }
      }
    } catch (const Error& e) {
      throw StageError(stage.name, e.what());
    }
    const std::string key = sha256_text(key_text);
    stage_keys_[stage.name] = key;
    const fs::path cache_file = config_.out / ".stages" / (stage.name + ".cache");

    bool skip = false;
    if (const auto cached = read_cache(cache_file); cached && cached->key == key) {
      skip = std::all_of(stage.outputs.begin(), stage.outputs.end(), [&](const fs::path& p) {
        const auto it = cached->output_hashes.find(p.filename().string());
        return fs::exists(p) && it != cached->output_hashes.end() && it->second == sha256_file(p);
      });
    }
    if (skip) {
      log_ << fmt::format("[{}] inputs unchanged, skipped\n", stage.name);
      result_.stages_skipped.push_back(stage.name);
    } else {
      log_ << fmt::format("[{}] running\n", stage.name);
      std::vector<std::string> warnings;
      try {
        stage.body(warnings);
      } catch (const StageError&) {
        throw;
      } catch (const std::exception& e) {
        throw StageError(stage.name, e.what());
      }
      for (auto& w : warnings) {
        log_ << fmt::format("[{}] warning: {}\n", stage.name, w);
        result_.warnings.push_back(fmt::format("[{}] {}", stage.name, w));
      }
      std::string cache = key + "\n";
      for (const auto& p : stage.outputs) cache += fmt::format("{} {}\n", p.filename().string(), sha256_file(p));
      write_file_atomic(cache_file, cache);
      result_.stages_run.push_back(stage.name);
    }
    for (const auto& p : stage.outputs) {
      produced_.insert(p.lexically_normal().string());
      hashes_.erase(p.lexically_normal().string());
      result_.outputs.push_back(p);
    }
  }

  void write_manifest(const fs::path& path) {
    std::string out = "# pvparam run manifest\n";
    out += fmt::format("version.pvparam = {}\n", pvparam_version);
    out += fmt::format("version.boost = {}.{}.{}\n", BOOST_VERSION / 100000, BOOST_VERSION / 100 % 1000,
                       BOOST_VERSION % 100);
    out += fmt::format("version.eigen = {}.{}.{}\n", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION);
    for (const auto& [k, v] : config_snapshot(config_)) out += fmt::format("param.{} = {}\n", k, v);
    for (const auto& [label, entry] : manifest_inputs_) {
      out += fmt::format("input.{}.file = {}\n", label, entry.first);
      out += fmt::format("input.{}.sha256 = {}\n", label, entry.second);
    }
    for (const auto& [stage, key] : stage_keys_) out += fmt::format("stage.{}.key = {}\n", stage, key);
    std::vector<std::pair<std::string, std::string>> outs;
    for (const auto& p : result_.outputs) outs.emplace_back(p.filename().string(), sha256_file(p));
    std::sort(outs.begin(), outs.end());
    for (const auto& [n, h] : outs) out += fmt::format("output.{}.sha256 = {}\n", n, h);
    write_file_atomic(path, out);
    result_.outputs.push_back(path);
  }

  PipelineResult& result() { return result_; }

 private:
  std::string hash_of(const fs::path& file) {
    const std::string k = file.lexically_normal().string();
    auto it = hashes_.find(k);
    if (it == hashes_.end()) it = hashes_.emplace(k, sha256_file(file)).first;
    return it->second;
  }

  const PipelineConfig& config_;
  std::ostream& log_;
  PipelineResult result_;
  std::map<std::string, std::string> hashes_;
  std::set<std::string> produced_;
  std::map<std::string, std::pair<std::string, std::string>> manifest_inputs_;
  std::map<std::string, std::string> stage_keys_;
};

std::map<std::string, std::string> pick(const std::map<std::string, std::string>& all,
                                        std::initializer_list<const char*> keys) {
  std::map<std::string, std::string> out;
  for (const char* k : keys) out[k] = all.at(k);
  return out;
}

std::vector<ModuleTemplate> templates_for(const PipelineConfig& c) {
  return c.templates.empty() ? builtin_module_templates() : load_module_templates_csv(c.templates);
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& c, std::ostream& log) {
  auto require = [](const fs::path& p, const char* stage, const char* key) {
    if (p.empty()) throw StageError(stage, fmt::format("config key '{}' is required", key));
  };
  require(c.mask, "vectorize", "mask");
  require(c.worldfile, "vectorize", "worldfile");
  require(c.pointcloud, "orient", "pointcloud");
  require(c.regions, "capacity", "regions");
  if (!c.seed) throw StageError("orient", "config key 'seed' is required");

  try {
    fs::create_directories(c.out / ".stages");
  } catch (const fs::filesystem_error& e) {
    throw StageError("setup", e.what());
  }
  const auto snap = config_snapshot(c);
  Runner runner(c, log);

  const fs::path footprints_path = c.out / "footprints.geojson";
  const fs::path orientations_path = c.out / "orientations.csv";
  const fs::path layer_path = c.out / "pv_layer.geojson";
  const fs::path capacity_path = c.out / "region_capacity.csv";

  runner.run({"vectorize",
              {{"mask", c.mask}, {"worldfile", c.worldfile}},
              pick(snap, {"threshold", "crs", "connectivity", "max-depth", "stop-ratio", "min-mismatch-px",
                          "min-component-px", "min-area-m2", "min-extent-m", "snap-grid-px", "coverage-subsamples",
                          "mismatch-opening-px"}),
              {footprints_path},
              [&](std::vector<std::string>&) {
                const GeoreferencedMask mask = load_georeferenced_mask(c.mask, c.worldfile, c.threshold, c.crs);
                write_footprint_layer(vectorize_mask(mask, c.refine), footprints_path);
              }});

  runner.run({"orient",
              {{"footprints", footprints_path}, {"pointcloud", c.pointcloud}},
              pick(snap, {"crs", "seed", "min-points", "iterations", "inlier-dist-m", "flat-threshold-deg"}),
              {orientations_path},
              [&](std::vector<std::string>& warnings) {
                const auto footprints = read_footprint_layer(footprints_path);
                const PointSet cloud = load_pointcloud_csv(c.pointcloud, c.crs);
                std::vector<OrientationRow> rows;
                for (std::size_t i = 0; i < footprints.size(); ++i) {
                  OrientationRow row{footprints[i].id,
                                     estimate_array_orientation(cloud, footprints[i], c.fit, *c.seed + i)};
                  if (row.result.estimate.confidence == OrientationConfidence::low_points) {
                    warnings.push_back(fmt::format("'{}': only {} points inside the footprint", row.id,
                                                   row.result.clipped_points));
                  }
                  rows.push_back(std::move(row));
                }
                write_orientations_csv(orientations_path, rows);
              }});

  runner.run({"layout",
              {{"footprints", footprints_path}, {"orientations", orientations_path}, {"templates", c.templates}},
              pick(snap, {"templates", "rated-power-default", "coverage-tau", "gap-m", "grid-alignment",
                          "offset-sweep", "normalize-hd", "hd-step-m"}),
              {layer_path},
              [&](std::vector<std::string>&) {
                const auto footprints = read_footprint_layer(footprints_path);
                const auto orientations = read_orientations_csv(orientations_path);
                const auto templates = templates_for(c);
                export_pv_layer(build_system_records(footprints, orientations, templates, c.layout), layer_path);
              }});

  runner.run({"capacity",
              {{"pv_layer", layer_path}, {"regions", c.regions}},
              pick(snap, {"max-system-kwp"}),
              {capacity_path},
              [&](std::vector<std::string>& warnings) {
                auto systems = import_pv_layer(layer_path);
                if (c.max_system_kwp) {
                  const auto before = systems.size();
                  std::erase_if(systems, [&](const PVSystemRecord& s) { return s.capacity_w / 1000.0 > *c.max_system_kwp; });
                  if (systems.size() != before) {
                    warnings.push_back(fmt::format("{} systems above {} kWp left out", before - systems.size(),
                                                   *c.max_system_kwp));
                  }
                }
                const auto regions = read_regions_geojson(c.regions);
                write_region_capacity_csv(capacity_path, aggregate_by_neighborhood(systems, regions, &warnings));
              }});

  // Validation runs when records come from a CSV or from the regions layer.
  std::vector<RegionValue> recorded_from_regions;
  if (c.recorded.empty()) {
    try {
      for (const auto& r : read_regions_geojson(c.regions)) {
        if (r.recorded_kwp) recorded_from_regions.push_back({r.region_id, *r.recorded_kwp});
      }
    } catch (const Error& e) {
      throw StageError("validate", e.what());
    }
  }
  if (!c.recorded.empty() || !recorded_from_regions.empty()) {
    const fs::path txt = c.out / "validation_report.txt";
    const fs::path csv = c.out / "validation_report.csv";
    runner.run({"validate",
                {{"region_capacity", capacity_path}, {"recorded", c.recorded}, {"regions_records", c.recorded.empty() ? c.regions : fs::path{}}},
                pick(snap, {"margin-pct"}),
                {txt, csv},
                [&](std::vector<std::string>& warnings) {
                  auto predicted = read_region_capacity_csv(capacity_path);
                  std::erase_if(predicted, [](const RegionValue& v) { return v.region_id == unassigned_region_id; });
                  const auto recorded = c.recorded.empty() ? recorded_from_regions : read_recorded_csv(c.recorded);
                  const auto report = capacity_validation_report(predicted, recorded, c.margin_pct);
                  for (const auto& id : report.unmatched_region_ids) {
                    warnings.push_back(fmt::format("region '{}' has no counterpart and was not compared", id));
                  }
                  write_file_atomic(txt, format_report_text(report));
                  write_file_atomic(csv, format_report_csv(report));
                }});
  }

  if (!c.weather.empty()) {
    if (!c.lat_deg || !c.lon_deg) throw StageError("profile", "config keys 'lat' and 'lon' are required with 'weather'");
    const fs::path upper_path = c.out / "profile_upper.csv";
    const fs::path b1_path = c.out / "profile_baseline1.csv";
    const fs::path b2_path = c.out / "profile_baseline2.csv";
    const bool have_lower = !c.lower.empty() || c.shading_derate.has_value();
    const fs::path lower_path = c.out / "profile_lower.csv";
    const fs::path band_path = c.out / "band_metrics.csv";
    const fs::path band2_path = c.out / "band_metrics_baseline2.csv";
    std::vector<fs::path> outputs{upper_path, b1_path, b2_path};
    if (have_lower) outputs.insert(outputs.end(), {lower_path, band_path, band2_path});
    runner.run({"profile",
                {{"pv_layer", layer_path}, {"weather", c.weather}, {"lower", c.lower}},
                pick(snap, {"derate", "gamma-t", "noct-coeff", "albedo", "eps-power", "lat", "lon", "shading-derate"}),
                outputs,
                [&](std::vector<std::string>& warnings) {
                  const auto systems = import_pv_layer(layer_path);
                  if (systems.empty()) throw InvalidArgument("no PV systems to simulate");
                  const WeatherSeries weather = read_weather_csv(c.weather);
                  const Site site{*c.lat_deg, *c.lon_deg};
                  std::vector<PowerSeries> per_system;
                  for (const auto& s : systems) per_system.push_back(simulate_upper_bound_profile(s, weather, site, c.model));
                  PowerSeries upper = aggregate_profiles(per_system);
                  upper.label = "upper";
                  const PowerSeries b1 = baseline_scenario_profile(systems, weather, site, BaselineScenario::baseline1, c.model);
                  const PowerSeries b2 = baseline_scenario_profile(systems, weather, site, BaselineScenario::baseline2, c.model);
                  write_power_csv(upper_path, upper);
                  write_power_csv(b1_path, b1);
                  write_power_csv(b2_path, b2);
                  if (!have_lower) return;
                  const PowerSeries lower_in =
                      c.lower.empty() ? shading_derate_stub(upper, *c.shading_derate) : read_power_csv(c.lower, "lower");
                  const GenerationBand band = assemble_gpb(upper, lower_in);
                  if (band.clamp_applied) warnings.push_back("lower bound exceeded upper bound somewhere; clamped");
                  write_power_csv(lower_path, band.lower);
                  const BandMetrics bm = band_width_metrics(band.upper, band.lower, c.eps_power_wh);
                  write_file_atomic(band_path, format_band_csv(bm, baseline_error_metrics(b1, band.upper, band.lower,
                                                                                          c.eps_power_wh)));
                  write_file_atomic(band2_path, format_band_csv(bm, baseline_error_metrics(b2, band.upper, band.lower,
                                                                                           c.eps_power_wh)));
                }});
  }

  try {
    runner.write_manifest(c.out / "manifest.txt");
  } catch (const Error& e) {
    throw StageError("manifest", e.what());
  }
  return std::move(runner.result());
}

int run_pipeline(const fs::path& config_path, std::ostream& log) {
  try {
    PipelineConfig config;
    try {
      config = load_pipeline_config(config_path);
    } catch (const Error& e) {
      throw StageError("config", e.what());
    }
    const PipelineResult r = run_pipeline(config, log);
    log << fmt::format("done: {} stages run, {} skipped, {} outputs\n", r.stages_run.size(), r.stages_skipped.size(),
                       r.outputs.size());
    return 0;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace pvparam
