#include "pvparam/timeseries.hpp"

#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "pvparam/csv.hpp"
#include "pvparam/error.hpp"

namespace pvparam {

namespace {

int read_int(std::string_view text, std::size_t pos, std::size_t len, std::string_view whole) {
  int v = 0;
  if (pos + len > text.size()) throw FormatError(fmt::format("malformed timestamp '{}'", whole));
  auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, v);
  if (ec != std::errc{} || ptr != text.data() + pos + len) {
    throw FormatError(fmt::format("malformed timestamp '{}'", whole));
  }
  return v;
}

void expect(std::string_view text, std::size_t pos, char c, std::string_view whole) {
  if (pos >= text.size() || text[pos] != c) throw FormatError(fmt::format("malformed timestamp '{}'", whole));
}

}  // namespace

Instant parse_iso8601_utc(std::string_view text) {
  using namespace std::chrono;
  const std::string_view whole = text;
  const int yr = read_int(text, 0, 4, whole);
  expect(text, 4, '-', whole);
  const int mo = read_int(text, 5, 2, whole);
  expect(text, 7, '-', whole);
  const int dy = read_int(text, 8, 2, whole);
  if (text.size() < 16 || (text[10] != 'T' && text[10] != ' ')) throw FormatError(fmt::format("malformed timestamp '{}'", whole));
  const int hh = read_int(text, 11, 2, whole);
  expect(text, 13, ':', whole);
  const int mm = read_int(text, 14, 2, whole);
  int ss = 0;
  std::size_t pos = 16;
  if (pos < text.size() && text[pos] == ':') {
    ss = read_int(text, 17, 2, whole);
    pos = 19;
  }
  const std::string_view suffix = text.substr(pos);
  if (!(suffix.empty() || suffix == "Z" || suffix == "+00:00" || suffix == "+0000")) {
    throw FormatError(fmt::format("timestamp '{}' is not UTC", whole));
  }
  const year_month_day ymd{year{yr}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(dy)}};
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 60) throw FormatError(fmt::format("invalid timestamp '{}'", whole));
  return sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss};
}

std::string format_iso8601_utc(Instant t) {
  using namespace std::chrono;
  const auto day_start = floor<days>(t);
  const year_month_day ymd{day_start};
  const hh_mm_ss hms{t - day_start};
  return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}Z", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), hms.hours().count(),
                     hms.minutes().count(), hms.seconds().count());
}

void PowerSeries::validate() const {
  if (timestamps.size() != values_wh.size()) {
    throw InvalidArgument(fmt::format("series '{}': {} timestamps but {} values", label, timestamps.size(),
                                      values_wh.size()));
  }
  for (std::size_t i = 0; i < values_wh.size(); ++i) {
    if (!std::isfinite(values_wh[i]) || values_wh[i] < 0.0) {
      throw InvalidArgument(fmt::format("series '{}': row {} has invalid energy {}", label, i + 1, values_wh[i]));
    }
  }
}

void check_aligned(const std::vector<Instant>& a, const std::vector<Instant>& b, std::string_view what) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] != b[i]) {
      throw InvalidArgument(fmt::format("{}: timestamps differ at row {} ({} vs {})", what, i + 1,
                                        format_iso8601_utc(a[i]), format_iso8601_utc(b[i])));
    }
  }
  if (a.size() != b.size()) {
    throw InvalidArgument(fmt::format("{}: series lengths differ ({} vs {}), first unmatched row {}", what, a.size(),
                                      b.size(), n + 1));
  }
}

PowerSeries read_power_csv(const std::filesystem::path& path, std::string label) {
  const CsvTable table = read_csv(path, {"timestamp", "energy_wh"});
  const std::size_t ct = table.column("timestamp"), ce = table.column("energy_wh");
  PowerSeries s;
  s.label = label.empty() ? path.stem().string() : std::move(label);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    try {
      s.timestamps.push_back(parse_iso8601_utc(table.rows[r][ct]));
    } catch (const FormatError& e) {
      throw FormatError(fmt::format("{}:{}: {}", path.string(), table.lines[r], e.what()));
    }
    s.values_wh.push_back(table.number(r, ce));
  }
  s.validate();
  return s;
}

void write_power_csv(const std::filesystem::path& path, const PowerSeries& series) {
  std::string out = "timestamp,energy_wh\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    out += fmt::format("{},{}\n", format_iso8601_utc(series.timestamps[i]), format_number(series.values_wh[i], 6));
  }
  write_file_atomic(path, out);
}

}  // namespace pvparam
