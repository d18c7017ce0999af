#pragma once

// Hourly energy profiles: solar position, isotropic plane-of-array
// irradiance, a simple DC model for the optimistic bound, the two fixed
// orientation baselines and generation band assembly.

#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "pvparam/system.hpp"
#include "pvparam/timeseries.hpp"

namespace pvparam {

struct WeatherSeries {
  std::vector<Instant> timestamps;
  std::vector<double> ghi_w_m2;
  std::vector<double> dni_w_m2;
  std::vector<double> dhi_w_m2;
  std::vector<std::optional<double>> temp_c;
  std::vector<std::optional<double>> wind_m_s;

  std::size_t size() const { return timestamps.size(); }
  /// Equal lengths, nonnegative irradiance and a strict one-hour step.
  /// Throws InvalidArgument.
  void validate() const;
};

/// `timestamp,ghi,dni,dhi,temp,wind`; temp and wind cells may be empty.
WeatherSeries read_weather_csv(const std::filesystem::path& path);
void write_weather_csv(const std::filesystem::path& path, const WeatherSeries& weather);

struct Site {
  double lat_deg = 0.0;
  double lon_deg = 0.0;
};

struct SunPosition {
  double zenith_deg = 0.0;
  /// Compass bearing, 0 = North, 90 = East.
  double azimuth_deg = 0.0;
};

/// Geometric (unrefracted) solar position. Throws InvalidArgument when
/// |lat| > 90.
SunPosition solar_position(Instant t, double lat_deg, double lon_deg);

struct IrradianceSample {
  double ghi = 0.0;
  double dni = 0.0;
  double dhi = 0.0;
};

/// Isotropic-sky transposition onto a surface of the given tilt and
/// azimuth.
double plane_of_array_irradiance(const IrradianceSample& row, double tilt_deg, double azimuth_deg,
                                 const SunPosition& sun, double albedo);

struct ModelParams {
  double derate = 0.85;
  /// Power temperature coefficient, 1/degC.
  double gamma_t = -0.004;
  /// Cell heating per unit irradiance, degC m^2 / W.
  double noct_coeff = 0.025;
  double albedo = 0.2;
};

/// capacity * POA/1000 * derate * max(0, 1 + gamma_t (T_cell - 25)) for
/// one hour. A missing ambient temperature means no temperature correction.
double hourly_energy_wh(double capacity_w, double poa_w_m2, std::optional<double> temp_c, const ModelParams& params);

/// Shading-free energy series of one system (its tilt, azimuth, capacity).
PowerSeries simulate_upper_bound_profile(const PVSystemRecord& system, const WeatherSeries& weather, const Site& site,
                                         const ModelParams& params = {});

enum class BaselineScenario {
  /// Every system faces due south at 35 degrees.
  baseline1,
  /// Every system lies flat.
  baseline2,
};

inline constexpr double baseline1_tilt_deg = 35.0;
inline constexpr double baseline1_azimuth_deg = 180.0;

/// Sum over systems with orientation overridden per the scenario.
PowerSeries baseline_scenario_profile(std::span<const PVSystemRecord> systems, const WeatherSeries& weather,
                                      const Site& site, BaselineScenario scenario, const ModelParams& params = {});

struct GenerationBand {
  PowerSeries upper;
  PowerSeries lower;
  bool clamp_applied = false;
};

/// Clamps lower to upper where it exceeds it. Throws InvalidArgument on
/// misaligned timestamps.
GenerationBand assemble_gpb(const PowerSeries& upper, const PowerSeries& lower);

/// Element-wise sum in input order. Throws InvalidArgument when the list is
/// empty or timestamps differ.
PowerSeries aggregate_profiles(std::span<const PowerSeries> series);

/// Stand-in for an externally simulated mismatch-aware series: `upper`
/// scaled by a constant factor in [0, 1].
PowerSeries shading_derate_stub(const PowerSeries& upper, double factor);

/// Cloudless hourly weather for `days` days starting at `start` (UTC
/// midnight), from an air-mass attenuation model. Temperature is constant.
WeatherSeries synthetic_clear_sky_weather(const Site& site, std::chrono::sys_days start, int days,
                                          double temp_c = 15.0, double wind_m_s = 2.0);

}  // namespace pvparam
