#include "emsim/csv.hpp"

#include "emsim/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

namespace emsim {

CsvTable::CsvTable(std::string source, std::vector<std::string> header,
                   std::vector<std::vector<std::string>> rows)
    : source_(std::move(source)), header_(std::move(header)), rows_(std::move(rows)) {}

std::optional<std::size_t> CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t CsvTable::require_column(std::string_view name) const {
  auto c = column(name);
  if (!c) throw SchemaViolation(source_ + ":" + std::string(name), "required column missing");
  return *c;
}

const std::string& CsvTable::text(std::size_t row, std::size_t col) const {
  static const std::string empty;
  const auto& r = rows_.at(row);
  return col < r.size() ? r[col] : empty;
}

double CsvTable::number(std::size_t row, std::size_t col) const {
  auto v = parse_double(text(row, col));
  if (!v) {
    throw SchemaViolation(source_ + ":" + header_.at(col),
                          "expected a number, got '" + text(row, col) + "'", row + 2);
  }
  return *v;
}

std::optional<double> CsvTable::optional_number(std::size_t row, std::size_t col) const {
  if (text(row, col).empty()) return std::nullopt;
  return number(row, col);
}

long long CsvTable::integer(std::size_t row, std::size_t col) const {
  const auto& s = text(row, col);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw SchemaViolation(source_ + ":" + header_.at(col), "expected an integer, got '" + s + "'",
                          row + 2);
  }
  return v;
}

CsvTable parse_csv(std::string_view text, std::string source) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
    record.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started) throw SchemaViolation(source, "stray quote inside field", line);
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw SchemaViolation(source, "unterminated quoted field", line);
  if (field_started || !record.empty()) end_record();

  if (records.empty()) throw SchemaViolation(source, "missing header row");
  std::vector<std::string> header = std::move(records.front());
  records.erase(records.begin());
  for (std::size_t r = 0; r < records.size(); ++r) {
    if (records[r].size() != header.size()) {
      throw SchemaViolation(source, "expected " + std::to_string(header.size()) + " fields, got " +
                                        std::to_string(records[r].size()),
                            r + 2);
    }
  }
  return CsvTable(std::move(source), std::move(header), std::move(records));
}

CsvTable read_csv(const std::filesystem::path& path) {
  return parse_csv(read_text_file(path), path.string());
}

std::string format_double(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  if (value == 0.0) return "0";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::optional<double> parse_double(std::string_view text) {
  if (text == "inf" || text == "+inf" || text == "Infinity") {
    return std::numeric_limits<double>::infinity();
  }
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || std::isnan(v)) return std::nullopt;
  return v;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << csv_escape(fields[i]);
  }
  out_ << '\n';
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile(path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace emsim
