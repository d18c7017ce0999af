#pragma once

// Minimal comma-separated table reading and number formatting shared by the
// file formats of every stage. Fields are unquoted; a header row is required.

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace pvparam {

struct CsvTable {
  std::filesystem::path source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// 1-based line number in the source file of each row.
  std::vector<std::size_t> lines;

  /// Column index by name; throws FormatError when missing.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;
  double number(std::size_t row, std::size_t col) const;
};

/// Throws IoError when unreadable and FormatError when any of `required`
/// is absent from the header or a row has the wrong field count.
CsvTable read_csv(const std::filesystem::path& path, std::initializer_list<std::string_view> required = {});

double parse_number(std::string_view text, std::string_view context);

/// Fixed notation with at most `max_decimals` fractional digits, trailing
/// zeros removed ("3.5", "1000", "-0.25").
std::string format_number(double value, int max_decimals = 6);

/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace pvparam
