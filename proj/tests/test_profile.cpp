#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "pvparam/error.hpp"
#include "pvparam/metrics.hpp"
#include "pvparam/profile.hpp"
#include "test_util.hpp"

using namespace pvparam;
using namespace std::chrono;

namespace {

PVSystemRecord system_with(std::string id, double tilt, double azimuth, double capacity_w) {
  PVSystemRecord s;
  s.id = std::move(id);
  s.footprint = testutil::rect(0, 0, 5, 3, s.id);
  s.orientation = {tilt, azimuth, OrientationConfidence::ok};
  s.capacity_w = capacity_w;
  return s;
}

PowerSeries series(std::vector<double> v, int start_hour = 0) {
  PowerSeries s;
  const Instant t0 = sys_days{year{2022} / 6 / 1} + hours(start_hour);
  for (std::size_t i = 0; i < v.size(); ++i) s.timestamps.push_back(t0 + hours(i));
  s.values_wh = std::move(v);
  return s;
}

Instant at(int y, unsigned m, unsigned d, int hh, int mm, int ss) {
  return sys_days{year{y} / month{m} / day{d}} + hours(hh) + minutes(mm) + seconds(ss);
}

double total(const PowerSeries& s) {
  double t = 0.0;
  for (double v : s.values_wh) t += v;
  return t;
}

const Site eindhoven{51.44, 5.47};

}  // namespace

// --- solar position ----------------------------------------------------------

TEST_CASE("equinox noon at the equator has the sun overhead") {
  // Solar noon at lon 0 on 2022-03-20 falls near 12:07 UTC.
  const auto sun = solar_position(at(2022, 3, 20, 12, 7, 0), 0.0, 0.0);
  CHECK(sun.zenith_deg < 1.0);
}

TEST_CASE("solar position matches reference rows") {
  struct Row {
    Instant t;
    double lat, lon, zenith, azimuth;
  };
  // Geometric positions from a published worked example and a
  // high-precision reference implementation.
  const Row rows[] = {
      {at(2003, 10, 17, 19, 30, 30), 39.742476, -105.1786, 50.128, 194.34},
      {at(2022, 4, 12, 12, 0, 0), 51.44, 5.47, 42.8822, 187.6674},
      {at(2022, 6, 21, 6, 0, 0), 51.44, 5.47, 68.8310, 78.5545},
      {at(2022, 12, 21, 10, 30, 0), 51.44, 5.47, 76.2780, 164.4126},
      {at(2022, 9, 1, 3, 0, 0), -33.86, 151.21, 44.8822, 337.0083},
  };
  for (const auto& r : rows) {
    const auto sun = solar_position(r.t, r.lat, r.lon);
    CHECK(std::abs(sun.zenith_deg - r.zenith) <= 0.5);
    CHECK(oracle::bearing_diff(sun.azimuth_deg, r.azimuth) <= 0.5);
  }
}

TEST_CASE("solar position ranges over a year at Eindhoven") {
  for (int h = 0; h < 24 * 365; h += 7) {
    const auto sun = solar_position(sys_days{year{2022} / 1 / 1} + hours(h), eindhoven.lat_deg, eindhoven.lon_deg);
    CHECK(sun.azimuth_deg >= 0.0);
    CHECK(sun.azimuth_deg < 360.0);
    CHECK(sun.zenith_deg >= 0.0);
    CHECK(sun.zenith_deg < 180.0);
  }
  CHECK_THROWS_AS(solar_position(at(2022, 1, 1, 0, 0, 0), 91.0, 0.0), InvalidArgument);
}

// --- transposition -------------------------------------------------------------

TEST_CASE("plane of array examples") {
  CHECK(plane_of_array_irradiance({1000, 1000, 0}, 0.0, 180.0, {0.0, 180.0}, 0.2) == doctest::Approx(1000.0));
  // Surface faces away from the sun: only the diffuse term survives.
  const double back = plane_of_array_irradiance({0, 800, 100}, 30.0, 0.0, {70.0, 180.0}, 0.2);
  CHECK(back == doctest::Approx(100.0 * (1.0 + std::cos(oracle::rad(30))) / 2.0));
  // Hand trigonometry.
  const double c35 = std::cos(oracle::rad(35));
  const double expected = 800.0 * std::cos(oracle::rad(5)) + 100.0 * (1 + c35) / 2 + 600.0 * 0.2 * (1 - c35) / 2;
  const double poa = plane_of_array_irradiance({600, 800, 100}, 35.0, 180.0, {40.0, 180.0}, 0.2);
  CHECK(std::abs(poa - 898.9) <= 0.5);
  CHECK(poa == doctest::Approx(expected).epsilon(1e-12));
}

// --- energy model ------------------------------------------------------------

TEST_CASE("hourly energy examples") {
  ModelParams unity;
  unity.derate = 1.0;
  CHECK(hourly_energy_wh(5000, 1000, 25.0 - 1000 * unity.noct_coeff, unity) == doctest::Approx(5000.0));
  CHECK(hourly_energy_wh(5000, 0, 10.0, ModelParams{}) == 0.0);
  ModelParams p;
  p.derate = 0.9;
  p.gamma_t = -0.004;
  // Ambient 32.5 degC + 500 * 0.025 = 45 degC cell.
  CHECK(std::abs(hourly_energy_wh(3500, 500, 32.5, p) - 1449.0) < 1e-6);
  CHECK(hourly_energy_wh(3500, 500, std::nullopt, p) == doctest::Approx(3500 * 0.5 * 0.9));
  // Extreme heat cannot make the output negative.
  p.gamma_t = -0.5;
  CHECK(hourly_energy_wh(3500, 500, 60.0, p) == 0.0);
}

// --- weather -------------------------------------------------------------------

TEST_CASE("weather CSV round trip and validation") {
  testutil::TempDir dir("wx");
  auto wx = synthetic_clear_sky_weather(eindhoven, sys_days{year{2022} / 6 / 21}, 1);
  wx.temp_c[3] = std::nullopt;
  write_weather_csv(dir / "w.csv", wx);
  const auto back = read_weather_csv(dir / "w.csv");
  REQUIRE(back.size() == 24);
  CHECK(back.timestamps == wx.timestamps);
  CHECK_FALSE(back.temp_c[3].has_value());
  CHECK(back.ghi_w_m2[12] == doctest::Approx(wx.ghi_w_m2[12]).epsilon(1e-6));

  auto gap = wx;
  gap.timestamps[5] += minutes(30);
  CHECK_THROWS_AS(gap.validate(), InvalidArgument);
  auto neg = wx;
  neg.dni_w_m2[12] = -1.0;
  CHECK_THROWS_AS(neg.validate(), InvalidArgument);
  {
    std::ofstream out(dir / "bad.csv");
    out << "timestamp,ghi,dni,dhi,temp,wind\n2022-01-01T00:00:00Z,1,2\n";
  }
  CHECK_THROWS(read_weather_csv(dir / "bad.csv"));
}

TEST_CASE("clear-sky generator is dark at night and bright at noon") {
  const auto wx = synthetic_clear_sky_weather(eindhoven, sys_days{year{2022} / 6 / 21}, 2);
  CHECK(wx.size() == 48);
  CHECK_NOTHROW(wx.validate());
  CHECK(wx.ghi_w_m2[0] == 0.0);
  CHECK(wx.ghi_w_m2[12] > 600.0);
  for (std::size_t i = 0; i < wx.size(); ++i) {
    CHECK(wx.ghi_w_m2[i] >= 0.0);
    CHECK(wx.ghi_w_m2[i] >= wx.dhi_w_m2[i] - 1e-9);
  }
}

// --- profiles ------------------------------------------------------------------

TEST_CASE("upper bound profile is zero at night and labelled with the system") {
  const auto wx = synthetic_clear_sky_weather(eindhoven, sys_days{year{2022} / 3 / 1}, 3);
  const auto prof = simulate_upper_bound_profile(system_with("pv_0001", 30, 200, 4000), wx, eindhoven);
  CHECK(prof.label == "pv_0001");
  CHECK(prof.timestamps == wx.timestamps);
  for (std::size_t i = 0; i < prof.size(); ++i) {
    CHECK(prof.values_wh[i] >= 0.0);
    if (wx.ghi_w_m2[i] == 0.0) CHECK(prof.values_wh[i] == 0.0);
  }
  CHECK(total(prof) > 0.0);
}

TEST_CASE("baseline 1 is a no-op for a south-facing 35 degree system") {
  const auto wx = synthetic_clear_sky_weather(eindhoven, sys_days{year{2022} / 5 / 10}, 2);
  const std::vector<PVSystemRecord> one{system_with("a", 35, 180, 3000)};
  const auto upper = simulate_upper_bound_profile(one[0], wx, eindhoven);
  const auto b1 = baseline_scenario_profile(one, wx, eindhoven, BaselineScenario::baseline1);
  CHECK(b1.label == "baseline1");
  for (std::size_t i = 0; i < b1.size(); ++i) CHECK(b1.values_wh[i] == doctest::Approx(upper.values_wh[i]));
}

TEST_CASE("baseline 2 stays under the baseline 1 peak on a clear summer day") {
  const auto wx = synthetic_clear_sky_weather(eindhoven, sys_days{year{2022} / 6 / 21}, 1);
  const std::vector<PVSystemRecord> one{system_with("a", 35, 180, 3000)};
  const auto b1 = baseline_scenario_profile(one, wx, eindhoven, BaselineScenario::baseline1);
  const auto b2 = baseline_scenario_profile(one, wx, eindhoven, BaselineScenario::baseline2);
  CHECK(b2.label == "baseline2");
  const double peak1 = *std::max_element(b1.values_wh.begin(), b1.values_wh.end());
  for (double v : b2.values_wh) CHECK(v <= peak1 + 1e-9);
}

TEST_CASE("baseline 1 collapses east and west systems") {
  const auto wx = synthetic_clear_sky_weather(eindhoven, sys_days{year{2022} / 7 / 1}, 2);
  const PVSystemRecord east = system_with("e", 20, 90, 2500), west = system_with("w", 40, 270, 2500);
  const auto pe = baseline_scenario_profile(std::vector{east}, wx, eindhoven, BaselineScenario::baseline1);
  const auto pw = baseline_scenario_profile(std::vector{west}, wx, eindhoven, BaselineScenario::baseline1);
  CHECK(pe.values_wh == pw.values_wh);
  CHECK(band_width_metrics(pe, pw).mapw_pct == 0.0);
  const auto both = baseline_scenario_profile(std::vector{east, west}, wx, eindhoven, BaselineScenario::baseline1);
  for (std::size_t i = 0; i < both.size(); ++i) CHECK(both.values_wh[i] == doctest::Approx(2.0 * pe.values_wh[i]));
  // Without the override the two differ.
  const auto ue = simulate_upper_bound_profile(east, wx, eindhoven);
  const auto uw = simulate_upper_bound_profile(west, wx, eindhoven);
  CHECK(ue.values_wh != uw.values_wh);
  CHECK_THROWS_AS(baseline_scenario_profile(std::vector<PVSystemRecord>{}, wx, eindhoven, BaselineScenario::baseline1),
                  InvalidArgument);
}

TEST_CASE("baseline 2 keeps capacity and lies flat") {
  const auto wx = synthetic_clear_sky_weather(eindhoven, sys_days{year{2022} / 4 / 1}, 1);
  const auto b2 = baseline_scenario_profile(std::vector{system_with("x", 40, 100, 2000)}, wx, eindhoven,
                                            BaselineScenario::baseline2);
  const auto flat = simulate_upper_bound_profile(system_with("y", 0, 180, 2000), wx, eindhoven);
  for (std::size_t i = 0; i < b2.size(); ++i) CHECK(b2.values_wh[i] == doctest::Approx(flat.values_wh[i]));
}

TEST_CASE("winter favours the tilted south system") {
  const auto wx = synthetic_clear_sky_weather(eindhoven, sys_days{year{2022} / 12 / 21}, 1);
  const double tilted = total(simulate_upper_bound_profile(system_with("a", 35, 180, 1000), wx, eindhoven));
  const double flat = total(simulate_upper_bound_profile(system_with("b", 0, 180, 1000), wx, eindhoven));
  CHECK(tilted > flat);
}

// --- band and aggregation ---------------------------------------------------------

TEST_CASE("generation band clamping") {
  const auto up = series({100, 200, 300});
  const auto ok = assemble_gpb(up, series({50, 200, 10}));
  CHECK_FALSE(ok.clamp_applied);
  CHECK(ok.lower.values_wh == std::vector<double>{50, 200, 10});
  const auto clamped = assemble_gpb(up, series({50, 205, 10}));
  CHECK(clamped.clamp_applied);
  CHECK(clamped.lower.values_wh[1] == 200.0);
  CHECK_THROWS_AS(assemble_gpb(up, series({1, 2, 3}, 1)), InvalidArgument);
}

TEST_CASE("band metrics through the band equal the raw series metrics") {
  const auto up = series({1000, 2000, 4000, 0, 3});
  const auto lo = series({800, 1500, 3600, 0, 2});
  const auto band = assemble_gpb(up, lo);
  const auto a = band_width_metrics(band.upper, band.lower);
  const auto b = band_width_metrics(up, lo);
  CHECK(a.mapw_pct == b.mapw_pct);
  CHECK(a.cpw_pct == b.cpw_pct);
  CHECK(a.n_used == b.n_used);
}

TEST_CASE("aggregation sums element-wise") {
  const std::vector<PowerSeries> one{series({1, 2, 3})};
  CHECK(aggregate_profiles(one).values_wh == std::vector<double>{1, 2, 3});
  const std::vector<PowerSeries> two{series({100, 100}), series({200, 200})};
  const auto sum = aggregate_profiles(two);
  CHECK(sum.values_wh == std::vector<double>{300, 300});
  CHECK(sum.label == "aggregate");
  const std::vector<PowerSeries> bad{series({1, 2}), series({1, 2}, 3)};
  CHECK_THROWS_AS(aggregate_profiles(bad), InvalidArgument);
  CHECK_THROWS_AS(aggregate_profiles(std::vector<PowerSeries>{}), InvalidArgument);
}

TEST_CASE("27 buildings sum to the same energy as grouped simulation") {
  const auto wx = synthetic_clear_sky_weather(eindhoven, sys_days{year{2022} / 8 / 15}, 2);
  const double orientations[3][2] = {{30, 180}, {15, 95}, {45, 250}};
  std::mt19937_64 rng(27);
  std::uniform_real_distribution<double> cap(1000.0, 9000.0);
  std::vector<PowerSeries> per_building;
  double grouped_cap[3] = {0, 0, 0};
  for (int b = 0; b < 27; ++b) {
    const int k = b % 3;
    const double c = cap(rng);
    grouped_cap[k] += c;
    per_building.push_back(simulate_upper_bound_profile(
        system_with("b" + std::to_string(b), orientations[k][0], orientations[k][1], c), wx, eindhoven));
  }
  const auto agg = aggregate_profiles(per_building);
  std::vector<PowerSeries> grouped;
  for (int k = 0; k < 3; ++k) {
    grouped.push_back(simulate_upper_bound_profile(
        system_with("g", orientations[k][0], orientations[k][1], grouped_cap[k]), wx, eindhoven));
  }
  const auto direct = aggregate_profiles(grouped);
  for (std::size_t i = 0; i < agg.size(); ++i) CHECK(std::abs(agg.values_wh[i] - direct.values_wh[i]) <= 1e-6);
}

TEST_CASE("doubling every capacity doubles the aggregate exactly") {
  const auto wx = synthetic_clear_sky_weather(eindhoven, sys_days{year{2022} / 9 / 1}, 1);
  std::vector<PowerSeries> base, doubled;
  for (int b = 0; b < 5; ++b) {
    base.push_back(simulate_upper_bound_profile(system_with("s", 10.0 + 7 * b, 100.0 + 40 * b, 1000.0 + b), wx,
                                                eindhoven));
    doubled.push_back(simulate_upper_bound_profile(system_with("s", 10.0 + 7 * b, 100.0 + 40 * b, 2 * (1000.0 + b)),
                                                   wx, eindhoven));
  }
  const auto a = aggregate_profiles(base), b = aggregate_profiles(doubled);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(b.values_wh[i] == 2.0 * a.values_wh[i]);
}

TEST_CASE("shading stub scales the upper series") {
  const auto up = series({100, 0, 50});
  CHECK(shading_derate_stub(up, 0.8).values_wh == std::vector<double>{80, 0, 40});
  CHECK_THROWS_AS(shading_derate_stub(up, 1.5), InvalidArgument);
}

TEST_CASE("power CSV round trip") {
  testutil::TempDir dir("pw");
  const auto s = series({0, 12.5, 1234.25});
  write_power_csv(dir / "p.csv", s);
  const auto back = read_power_csv(dir / "p.csv");
  CHECK(back.timestamps == s.timestamps);
  CHECK(back.values_wh == s.values_wh);
  CHECK(parse_iso8601_utc("2022-06-01 05:00") == s.timestamps[0] + hours(5));
  CHECK(format_iso8601_utc(s.timestamps[1]) == "2022-06-01T01:00:00Z");
  CHECK_THROWS(parse_iso8601_utc("2022-06-01T05:00:00+02:00"));
}
