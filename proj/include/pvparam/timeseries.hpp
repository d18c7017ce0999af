#pragma once

// Timestamped hourly energy series and their CSV form
// (`timestamp,energy_wh`, ISO 8601 UTC).

#include <chrono>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace pvparam {

using Instant = std::chrono::sys_seconds;

/// Accepts "YYYY-MM-DDTHH:MM[:SS]" with an optional "Z" or "+00:00" suffix
/// (a space may replace the "T"). Other offsets are rejected.
Instant parse_iso8601_utc(std::string_view text);
/// "YYYY-MM-DDTHH:MM:SSZ".
std::string format_iso8601_utc(Instant t);

struct PowerSeries {
  std::vector<Instant> timestamps;
  std::vector<double> values_wh;
  std::string label;

  std::size_t size() const { return values_wh.size(); }
  /// Equal lengths and nonnegative, finite values; throws InvalidArgument.
  void validate() const;
};

/// Throws InvalidArgument naming the first row (1-based data row) where the
/// two timestamp vectors disagree, or the length mismatch.
void check_aligned(const std::vector<Instant>& a, const std::vector<Instant>& b, std::string_view what);

PowerSeries read_power_csv(const std::filesystem::path& path, std::string label = {});
void write_power_csv(const std::filesystem::path& path, const PowerSeries& series);

}  // namespace pvparam
