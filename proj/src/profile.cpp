#include "pvparam/profile.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "pvparam/csv.hpp"
#include "pvparam/error.hpp"

namespace pvparam {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double deg2rad = pi / 180.0;
constexpr double rad2deg = 180.0 / pi;

double wrap360(double deg) {
  double r = std::fmod(deg, 360.0);
  if (r < 0.0) r += 360.0;
  return r;
}

std::optional<double> optional_number(const CsvTable& t, std::size_t r, std::size_t c) {
  if (t.rows[r][c].empty()) return std::nullopt;
  return t.number(r, c);
}

std::string optional_text(const std::optional<double>& v) { return v ? format_number(*v, 3) : std::string{}; }

}  // namespace

void WeatherSeries::validate() const {
  const std::size_t n = timestamps.size();
  if (ghi_w_m2.size() != n || dni_w_m2.size() != n || dhi_w_m2.size() != n || temp_c.size() != n ||
      wind_m_s.size() != n) {
    throw InvalidArgument("weather series columns have different lengths");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (double v : {ghi_w_m2[i], dni_w_m2[i], dhi_w_m2[i]}) {
      if (!std::isfinite(v) || v < 0.0) {
        throw InvalidArgument(fmt::format("weather row {}: irradiance must be finite and >= 0", i + 1));
      }
    }
    if (i > 0 && timestamps[i] - timestamps[i - 1] != std::chrono::hours{1}) {
      throw InvalidArgument(fmt::format("weather row {} ({}): timestamps must advance by exactly one hour", i + 1,
                                        format_iso8601_utc(timestamps[i])));
    }
  }
}

WeatherSeries read_weather_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path, {"timestamp", "ghi", "dni", "dhi", "temp", "wind"});
  const auto cts = t.column("timestamp"), cg = t.column("ghi"), cn = t.column("dni"), cd = t.column("dhi"),
             ct = t.column("temp"), cw = t.column("wind");
  WeatherSeries w;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    try {
      w.timestamps.push_back(parse_iso8601_utc(t.rows[r][cts]));
    } catch (const FormatError& e) {
      throw FormatError(fmt::format("{}:{}: {}", path.string(), t.lines[r], e.what()));
    }
    w.ghi_w_m2.push_back(t.number(r, cg));
    w.dni_w_m2.push_back(t.number(r, cn));
    w.dhi_w_m2.push_back(t.number(r, cd));
    w.temp_c.push_back(optional_number(t, r, ct));
    w.wind_m_s.push_back(optional_number(t, r, cw));
  }
  w.validate();
  return w;
}

void write_weather_csv(const std::filesystem::path& path, const WeatherSeries& w) {
  w.validate();
  std::string out = "timestamp,ghi,dni,dhi,temp,wind\n";
  for (std::size_t i = 0; i < w.size(); ++i) {
    out += fmt::format("{},{},{},{},{},{}\n", format_iso8601_utc(w.timestamps[i]), format_number(w.ghi_w_m2[i], 3),
                       format_number(w.dni_w_m2[i], 3), format_number(w.dhi_w_m2[i], 3), optional_text(w.temp_c[i]),
                       optional_text(w.wind_m_s[i]));
  }
  write_file_atomic(path, out);
}

// Low-precision solar coordinates (mean elements with the first
// nutation/aberration terms), good to roughly 0.01 degree over 1900-2100.
SunPosition solar_position(Instant t, double lat_deg, double lon_deg) {
  if (!(std::abs(lat_deg) <= 90.0)) throw InvalidArgument(fmt::format("latitude {} outside [-90, 90]", lat_deg));
  const double unix_s = static_cast<double>(t.time_since_epoch().count());
  const double jd = unix_s / 86400.0 + 2440587.5;
  const double jc = (jd - 2451545.0) / 36525.0;

  const double l0 = wrap360(280.46646 + jc * (36000.76983 + jc * 0.0003032));
  const double m = 357.52911 + jc * (35999.05029 - 0.0001537 * jc);
  const double ecc = 0.016708634 - jc * (0.000042037 + 0.0000001267 * jc);
  const double mr = m * deg2rad;
  const double center = std::sin(mr) * (1.914602 - jc * (0.004817 + 0.000014 * jc)) +
                        std::sin(2 * mr) * (0.019993 - 0.000101 * jc) + std::sin(3 * mr) * 0.000289;
  const double true_long = l0 + center;
  const double omega = (125.04 - 1934.136 * jc) * deg2rad;
  const double app_long = (true_long - 0.00569 - 0.00478 * std::sin(omega)) * deg2rad;
  const double mean_obliq = 23.0 + (26.0 + (21.448 - jc * (46.815 + jc * (0.00059 - jc * 0.001813))) / 60.0) / 60.0;
  const double obliq = (mean_obliq + 0.00256 * std::cos(omega)) * deg2rad;
  const double decl = std::asin(std::sin(obliq) * std::sin(app_long));

  const double y = std::pow(std::tan(obliq / 2.0), 2);
  const double l0r = l0 * deg2rad;
  const double eq_time_min = 4.0 * rad2deg *
                             (y * std::sin(2 * l0r) - 2 * ecc * std::sin(mr) +
                              4 * ecc * y * std::sin(mr) * std::cos(2 * l0r) - 0.5 * y * y * std::sin(4 * l0r) -
                              1.25 * ecc * ecc * std::sin(2 * mr));

  const double minutes_of_day = std::fmod(unix_s, 86400.0) / 60.0;
  const double true_solar_min = minutes_of_day + eq_time_min + 4.0 * lon_deg;
  const double hour_angle = (true_solar_min / 4.0 - 180.0) * deg2rad;

  const double lat = lat_deg * deg2rad;
  const double cos_zen = std::clamp(std::sin(lat) * std::sin(decl) + std::cos(lat) * std::cos(decl) * std::cos(hour_angle),
                                    -1.0, 1.0);
  SunPosition sun;
  sun.zenith_deg = std::acos(cos_zen) * rad2deg;
  // Measured from south, positive westward, then shifted to a compass bearing.
  const double from_south = std::atan2(std::sin(hour_angle),
                                       std::cos(hour_angle) * std::sin(lat) - std::tan(decl) * std::cos(lat));
  sun.azimuth_deg = wrap360(from_south * rad2deg + 180.0);
  if (sun.azimuth_deg >= 360.0) sun.azimuth_deg = 0.0;
  return sun;
}

double plane_of_array_irradiance(const IrradianceSample& row, double tilt_deg, double azimuth_deg,
                                 const SunPosition& sun, double albedo) {
  const double tilt = tilt_deg * deg2rad;
  const double zen = sun.zenith_deg * deg2rad;
  const double cos_aoi =
      std::cos(zen) * std::cos(tilt) + std::sin(zen) * std::sin(tilt) * std::cos((sun.azimuth_deg - azimuth_deg) * deg2rad);
  const double beam = row.dni * std::max(0.0, cos_aoi);
  const double sky = row.dhi * (1.0 + std::cos(tilt)) / 2.0;
  const double ground = row.ghi * albedo * (1.0 - std::cos(tilt)) / 2.0;
  return beam + sky + ground;
}

double hourly_energy_wh(double capacity_w, double poa_w_m2, std::optional<double> temp_c, const ModelParams& params) {
  if (!(poa_w_m2 > 0.0)) return 0.0;
  const double t_cell = temp_c ? *temp_c + poa_w_m2 * params.noct_coeff : 25.0;
  const double thermal = std::max(0.0, 1.0 + params.gamma_t * (t_cell - 25.0));
  return capacity_w * (poa_w_m2 / 1000.0) * params.derate * thermal;
}

namespace {

PowerSeries simulate(double capacity_w, double tilt_deg, double azimuth_deg, const WeatherSeries& weather,
                     const Site& site, const ModelParams& params, std::string label) {
  weather.validate();
  if (!(capacity_w >= 0.0)) throw InvalidArgument(fmt::format("system '{}': capacity must be >= 0", label));
  PowerSeries out;
  out.label = std::move(label);
  out.timestamps = weather.timestamps;
  out.values_wh.reserve(weather.size());
  for (std::size_t i = 0; i < weather.size(); ++i) {
    const SunPosition sun = solar_position(weather.timestamps[i], site.lat_deg, site.lon_deg);
    const IrradianceSample row{weather.ghi_w_m2[i], weather.dni_w_m2[i], weather.dhi_w_m2[i]};
    const double poa = plane_of_array_irradiance(row, tilt_deg, azimuth_deg, sun, params.albedo);
    out.values_wh.push_back(hourly_energy_wh(capacity_w, poa, weather.temp_c[i], params));
  }
  return out;
}

}  // namespace

PowerSeries simulate_upper_bound_profile(const PVSystemRecord& system, const WeatherSeries& weather, const Site& site,
                                         const ModelParams& params) {
  return simulate(system.capacity_w, system.orientation.tilt_deg, system.orientation.azimuth_deg, weather, site, params,
                  system.id);
}

PowerSeries baseline_scenario_profile(std::span<const PVSystemRecord> systems, const WeatherSeries& weather,
                                      const Site& site, BaselineScenario scenario, const ModelParams& params) {
  if (systems.empty()) throw InvalidArgument("baseline profile needs at least one system");
  std::vector<PowerSeries> parts;
  parts.reserve(systems.size());
  for (const auto& s : systems) {
    const double tilt = scenario == BaselineScenario::baseline1 ? baseline1_tilt_deg : 0.0;
    const double az = scenario == BaselineScenario::baseline1 ? baseline1_azimuth_deg : s.orientation.azimuth_deg;
    parts.push_back(simulate(s.capacity_w, tilt, az, weather, site, params, s.id));
  }
  PowerSeries total = aggregate_profiles(parts);
  total.label = scenario == BaselineScenario::baseline1 ? "baseline1" : "baseline2";
  return total;
}

GenerationBand assemble_gpb(const PowerSeries& upper, const PowerSeries& lower) {
  upper.validate();
  lower.validate();
  check_aligned(upper.timestamps, lower.timestamps, "generation band (upper vs lower)");
  GenerationBand band{upper, lower, false};
  for (std::size_t i = 0; i < band.lower.size(); ++i) {
    if (band.lower.values_wh[i] > band.upper.values_wh[i]) {
      band.lower.values_wh[i] = band.upper.values_wh[i];
      band.clamp_applied = true;
    }
  }
  return band;
}

PowerSeries aggregate_profiles(std::span<const PowerSeries> series) {
  if (series.empty()) throw InvalidArgument("aggregate_profiles: no series given");
  PowerSeries total;
  total.label = "aggregate";
  total.timestamps = series.front().timestamps;
  total.values_wh.assign(total.timestamps.size(), 0.0);
  for (const auto& s : series) {
    s.validate();
    check_aligned(total.timestamps, s.timestamps, fmt::format("aggregate_profiles ('{}')", s.label));
    for (std::size_t i = 0; i < s.size(); ++i) total.values_wh[i] += s.values_wh[i];
  }
  return total;
}

PowerSeries shading_derate_stub(const PowerSeries& upper, double factor) {
  if (!(factor >= 0.0 && factor <= 1.0)) throw InvalidArgument("shading derate factor must be in [0, 1]");
  PowerSeries out = upper;
  out.label = upper.label.empty() ? "lower" : upper.label + "_lower";
  for (double& v : out.values_wh) v *= factor;
  return out;
}

WeatherSeries synthetic_clear_sky_weather(const Site& site, std::chrono::sys_days start, int days, double temp_c,
                                          double wind_m_s) {
  if (days <= 0) throw InvalidArgument("synthetic weather needs a positive number of days");
  WeatherSeries w;
  const Instant t0{std::chrono::duration_cast<std::chrono::seconds>(start.time_since_epoch())};
  for (int h = 0; h < days * 24; ++h) {
    const Instant t = t0 + std::chrono::hours{h};
    const SunPosition sun = solar_position(t, site.lat_deg, site.lon_deg);
    const double cz = std::cos(sun.zenith_deg * deg2rad);
    double dni = 0.0, dhi = 0.0;
    if (cz > 0.01) {
      const double air_mass = 1.0 / cz;
      dni = 1353.0 * std::pow(0.7, std::pow(air_mass, 0.678));
      dhi = 0.12 * dni * cz + 20.0 * cz;
    }
    w.timestamps.push_back(t);
    w.dni_w_m2.push_back(dni);
    w.dhi_w_m2.push_back(dhi);
    w.ghi_w_m2.push_back(dni * std::max(cz, 0.0) + dhi);
    w.temp_c.emplace_back(temp_c);
    w.wind_m_s.emplace_back(wind_m_s);
  }
  return w;
}

}  // namespace pvparam
