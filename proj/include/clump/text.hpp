#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace clump {

/// Thrown for malformed textual input. `line()` is 1-based, 0 when the
/// problem is not tied to a particular line (e.g. empty input).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Shortest decimal string that parses back to exactly `value`.
/// Non-finite values render as "nan", "inf" and "-inf".
std::string format_double(double value);

/// Parses a complete field as a double; accepts "nan"/"inf".
/// Returns false if the field is empty or has trailing garbage.
bool parse_double(std::string_view field, double& out);

/// Splits one CSV record on commas. No quoting support; fields are trimmed
/// of surrounding spaces and a trailing '\r' is dropped.
std::vector<std::string_view> split_csv_line(std::string_view line);

/// Reads a whole stream into lines, stripping a leading UTF-8 BOM.
class LineReader {
 public:
  explicit LineReader(std::string text);
  /// Next line, skipping lines that are blank after trimming.
  bool next(std::string_view& line);
  std::size_t line_number() const noexcept { return line_no_; }

 private:
  std::string text_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

}  // namespace clump
