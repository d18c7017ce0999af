// pvparam command-line interface: one subcommand per pipeline stage plus
// `run` for the whole chain.

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "pvparam/csv.hpp"
#include "pvparam/pipeline.hpp"

namespace fs = std::filesystem;
using namespace pvparam;

namespace {

// Flags shared with the config file format, plus per-command file flags.
struct Command {
  CLI::App* app = nullptr;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> config_options;
  std::map<std::string, std::string> local;
  std::string config;

  void config_flags(std::initializer_list<std::pair<const char*, const char*>> keys) {
    for (const auto& [key, help] : keys) {
      config_options[key] = app->add_option(std::string("--") + key, values[key], help);
    }
  }
  void file_flag(const char* key, const char* help, bool required = false) {
    auto* opt = app->add_option(std::string("--") + key, local[key], help);
    if (required) opt->required();
  }
  const std::string& get(const char* key) const { return local.at(key); }

  // Config file first, then flags given on the command line.
  PipelineConfig resolve() const {
    PipelineConfig c;
    if (!config.empty()) c = load_pipeline_config(config);
    std::map<std::string, std::string> given;
    for (const auto& [key, opt] : config_options) {
      if (opt->count() > 0) given[key] = values.at(key);
    }
    apply_config(c, given);
    return c;
  }
};

Command& make_command(CLI::App& root, std::vector<std::unique_ptr<Command>>& all, const char* name, const char* help) {
  auto cmd = std::make_unique<Command>();
  cmd->app = root.add_subcommand(name, help);
  cmd->app->add_option("--config", cmd->config, "key = value file supplying defaults");
  all.push_back(std::move(cmd));
  return *all.back();
}

std::vector<ModuleTemplate> templates_of(const PipelineConfig& c) {
  return c.templates.empty() ? builtin_module_templates() : load_module_templates_csv(c.templates);
}

fs::path require_path(const fs::path& p, const char* key) {
  if (p.empty()) throw InvalidArgument(fmt::format("--{} is required (flag or config)", key));
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pvparam: PV footprints, orientation, layout, capacity and generation metrics"};
  app.require_subcommand(1);
  std::vector<std::unique_ptr<Command>> commands;

  auto& vec = make_command(app, commands, "vectorize", "mask + world file -> footprint GeoJSON");
  vec.config_flags({{"mask", "PV mask (8-bit PGM or PNG)"},
                    {"worldfile", "six-line world file"},
                    {"out", "output GeoJSON"},
                    {"crs", "CRS identifier of the map coordinates"},
                    {"threshold", "gray level at or above which a pixel is PV"},
                    {"connectivity", "4 or 8"},
                    {"max-depth", "refinement depth"},
                    {"min-area-m2", "smallest footprint kept"},
                    {"mismatch-opening-px", "opening radius for mismatch pixels, 0 = off"}});

  auto& orient = make_command(app, commands, "orient", "footprints + point cloud -> tilt/azimuth CSV");
  orient.file_flag("footprints", "footprint GeoJSON", true);
  orient.config_flags({{"pointcloud", "x,y,z CSV"},
                       {"out", "output CSV"},
                       {"seed", "RANSAC seed"},
                       {"crs", "CRS of the point cloud"},
                       {"iterations", "RANSAC iterations"},
                       {"inlier-dist-m", "inlier distance"},
                       {"flat-threshold-deg", "tilt below which a roof counts as flat"}});

  auto& layout = make_command(app, commands, "layout", "footprints + orientations -> PV layer GeoJSON");
  layout.file_flag("footprints", "footprint GeoJSON", true);
  layout.file_flag("orientations", "orientation CSV", true);
  layout.config_flags({{"out", "output GeoJSON"},
                       {"templates", "template CSV replacing the built-in table"},
                       {"coverage-tau", "coverage needed to accept a cell"},
                       {"gap-m", "spacing between modules"},
                       {"grid-alignment", "mbr_short_axis or downslope"},
                       {"offset-sweep", "grid phases per axis"},
                       {"normalize-hd", "divide HD by the rectangle diagonal"}});

  auto& cap = make_command(app, commands, "capacity", "PV layer + regions -> region_id,predicted_kwp");
  cap.file_flag("layer", "PV layer GeoJSON", true);
  cap.config_flags({{"regions", "regions GeoJSON"}, {"out", "output CSV"}, {"max-system-kwp", "ignore larger systems"}});

  auto& val = make_command(app, commands, "validate", "predicted vs recorded capacity report");
  val.file_flag("predicted", "region_id,predicted_kwp CSV", true);
  val.config_flags({{"recorded", "region_id,recorded_kwp CSV"},
                    {"out", "output directory for validation_report.txt/.csv"},
                    {"margin-pct", "APE margin for the within-margin fraction"}});

  auto& prof = make_command(app, commands, "profile", "PV layer + weather -> hourly energy series");
  prof.file_flag("layer", "PV layer GeoJSON", true);
  prof.config_flags({{"weather", "timestamp,ghi,dni,dhi,temp,wind CSV"},
                     {"out", "output directory"},
                     {"lat", "site latitude"},
                     {"lon", "site longitude"},
                     {"derate", "system derate"},
                     {"albedo", "ground albedo"},
                     {"shading-derate", "also write a constant-factor lower bound"}});

  auto& band = make_command(app, commands, "band-metrics", "MAPW/CPW and baseline errors of a generation band");
  band.file_flag("upper", "upper-bound power CSV", true);
  band.file_flag("lower", "lower-bound power CSV", true);
  band.file_flag("baseline", "baseline power CSV");
  band.config_flags({{"out", "output CSV"}, {"eps-power", "Wh below which a reference hour is skipped"}});

  auto& run = make_command(app, commands, "run", "full pipeline from a config file");
  run.config_flags({{"mask", "PV mask"},
                    {"worldfile", "world file"},
                    {"pointcloud", "point cloud CSV"},
                    {"regions", "regions GeoJSON"},
                    {"recorded", "recorded capacity CSV"},
                    {"weather", "weather CSV"},
                    {"out", "output directory"},
                    {"seed", "RANSAC seed"},
                    {"margin-pct", "APE margin"},
                    {"max-system-kwp", "ignore larger systems"}});

  CLI11_PARSE(app, argc, argv);

  try {
    if (vec.app->parsed()) {
      const PipelineConfig c = vec.resolve();
      const auto mask = load_georeferenced_mask(require_path(c.mask, "mask"), require_path(c.worldfile, "worldfile"),
                                                c.threshold, c.crs);
      const auto footprints = vectorize_mask(mask, c.refine);
      write_footprint_layer(footprints, c.out);
      std::cout << fmt::format("{} footprints -> {}\n", footprints.size(), c.out.string());
    } else if (orient.app->parsed()) {
      const PipelineConfig c = orient.resolve();
      if (!c.seed) throw InvalidArgument("--seed is required");
      const auto footprints = read_footprint_layer(orient.get("footprints"));
      // Without --crs the cloud is taken to share the footprints' CRS.
      const std::string crs = c.crs.empty() && !footprints.empty() ? footprints.front().crs_id : c.crs;
      const PointSet cloud = load_pointcloud_csv(require_path(c.pointcloud, "pointcloud"), crs);
      std::vector<OrientationRow> rows;
      for (std::size_t i = 0; i < footprints.size(); ++i) {
        rows.push_back({footprints[i].id, estimate_array_orientation(cloud, footprints[i], c.fit, *c.seed + i)});
      }
      write_orientations_csv(c.out, rows);
      std::cout << fmt::format("{} orientations -> {}\n", rows.size(), c.out.string());
    } else if (layout.app->parsed()) {
      const PipelineConfig c = layout.resolve();
      const auto footprints = read_footprint_layer(layout.get("footprints"));
      const auto orientations = read_orientations_csv(layout.get("orientations"));
      const auto templates = templates_of(c);
      const auto systems = build_system_records(footprints, orientations, templates, c.layout);
      export_pv_layer(systems, c.out);
      std::cout << fmt::format("{} systems -> {}\n", systems.size(), c.out.string());
    } else if (cap.app->parsed()) {
      const PipelineConfig c = cap.resolve();
      auto systems = import_pv_layer(cap.get("layer"));
      if (c.max_system_kwp) {
        std::erase_if(systems, [&](const PVSystemRecord& s) { return s.capacity_w / 1000.0 > *c.max_system_kwp; });
      }
      std::vector<std::string> warnings;
      const auto values = aggregate_by_neighborhood(systems, read_regions_geojson(require_path(c.regions, "regions")),
                                                    &warnings);
      for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
      write_region_capacity_csv(c.out, values);
      std::cout << fmt::format("{} regions -> {}\n", values.size(), c.out.string());
    } else if (val.app->parsed()) {
      const PipelineConfig c = val.resolve();
      auto predicted = read_region_capacity_csv(val.get("predicted"));
      std::erase_if(predicted, [](const RegionValue& v) { return v.region_id == unassigned_region_id; });
      const auto recorded = read_recorded_csv(require_path(c.recorded, "recorded"));
      const auto report = capacity_validation_report(predicted, recorded, c.margin_pct);
      fs::create_directories(c.out);
      write_file_atomic(c.out / "validation_report.txt", format_report_text(report));
      write_file_atomic(c.out / "validation_report.csv", format_report_csv(report));
      std::cout << format_report_text(report);
    } else if (prof.app->parsed()) {
      const PipelineConfig c = prof.resolve();
      if (!c.lat_deg || !c.lon_deg) throw InvalidArgument("--lat and --lon are required");
      const auto systems = import_pv_layer(prof.get("layer"));
      if (systems.empty()) throw InvalidArgument("the PV layer has no systems");
      const auto weather = read_weather_csv(require_path(c.weather, "weather"));
      const Site site{*c.lat_deg, *c.lon_deg};
      std::vector<PowerSeries> parts;
      for (const auto& s : systems) parts.push_back(simulate_upper_bound_profile(s, weather, site, c.model));
      fs::create_directories(c.out);
      const PowerSeries upper = aggregate_profiles(parts);
      write_power_csv(c.out / "profile_upper.csv", upper);
      write_power_csv(c.out / "profile_baseline1.csv",
                      baseline_scenario_profile(systems, weather, site, BaselineScenario::baseline1, c.model));
      write_power_csv(c.out / "profile_baseline2.csv",
                      baseline_scenario_profile(systems, weather, site, BaselineScenario::baseline2, c.model));
      if (c.shading_derate) write_power_csv(c.out / "profile_lower.csv", shading_derate_stub(upper, *c.shading_derate));
      std::cout << fmt::format("profiles for {} systems -> {}\n", systems.size(), c.out.string());
    } else if (band.app->parsed()) {
      const PipelineConfig c = band.resolve();
      const GenerationBand gpb = assemble_gpb(read_power_csv(band.get("upper"), "upper"),
                                              read_power_csv(band.get("lower"), "lower"));
      if (gpb.clamp_applied) std::cerr << "warning: lower exceeded upper somewhere; clamped\n";
      const BandMetrics bm = band_width_metrics(gpb.upper, gpb.lower, c.eps_power_wh);
      std::optional<BaselineErrorMetrics> be;
      if (!band.get("baseline").empty()) {
        be = baseline_error_metrics(read_power_csv(band.get("baseline"), "baseline"), gpb.upper, gpb.lower,
                                    c.eps_power_wh);
      }
      const std::string text = format_band_csv(bm, be);
      write_file_atomic(c.out, text);
      std::cout << text;
    } else if (run.app->parsed()) {
      if (run.config.empty()) throw InvalidArgument("run needs --config");
      const PipelineConfig c = run.resolve();
      const PipelineResult r = run_pipeline(c, std::cout);
      std::cout << fmt::format("done: {} stages run, {} skipped\n", r.stages_run.size(), r.stages_skipped.size());
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
