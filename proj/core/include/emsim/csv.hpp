#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace emsim {

/// A parsed CSV file with a header row.
class CsvTable {
 public:
  CsvTable() = default;
  CsvTable(std::string source, std::vector<std::string> header,
           std::vector<std::vector<std::string>> rows);

  const std::string& source() const noexcept { return source_; }
  const std::vector<std::string>& header() const noexcept { return header_; }
  const std::vector<std::vector<std::string>>& rows() const noexcept { return rows_; }
  std::size_t size() const noexcept { return rows_.size(); }

  std::optional<std::size_t> column(std::string_view name) const;
  /// Throws SchemaViolation when the column is absent.
  std::size_t require_column(std::string_view name) const;

  // Typed cell accessors; `row` is the 0-based data row. Errors are reported
  // with the 1-based file line (header = line 1).
  const std::string& text(std::size_t row, std::size_t col) const;
  double number(std::size_t row, std::size_t col) const;
  std::optional<double> optional_number(std::size_t row, std::size_t col) const;
  long long integer(std::size_t row, std::size_t col) const;

 private:
  std::string source_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Parses CSV text (RFC 4180 quoting, LF or CRLF line ends).
CsvTable parse_csv(std::string_view text, std::string source = "<memory>");
/// Throws MissingFile when the file cannot be read.
CsvTable read_csv(const std::filesystem::path& path);

/// Shortest decimal text that parses back to exactly `value`. Infinity is
/// written as "inf".
std::string format_double(double value);
/// Strict decimal parse (also accepts "inf"); nullopt on malformed input.
std::optional<double> parse_double(std::string_view text);

/// Quotes a field only when it contains a delimiter, quote or newline.
std::string csv_escape(std::string_view field);

/// Writes rows with ',' separators and LF line ends.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}
  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& out_;
};

/// Writes `content` to `path` atomically enough for our purposes (creates
/// parent directories). Throws Error on I/O failure.
void write_text_file(const std::filesystem::path& path, std::string_view content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace emsim
