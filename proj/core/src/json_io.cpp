#include "json_io.hpp"

#include "emsim/csv.hpp"
#include "emsim/error.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace emsim::detail {

json read_json(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaViolation(path.string(), std::string("malformed JSON: ") + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& doc) {
  write_text_file(path, doc.dump(2) + "\n");
}

const json& require(const json& obj, const char* key, const std::string& context) {
  if (!obj.is_object()) throw SchemaViolation(context, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaViolation(context + "." + key, "required field missing");
  return *it;
}

double number_value(const json& value, const std::string& context) {
  if (value.is_number()) return value.get<double>();
  if (value.is_string()) {
    if (auto v = parse_double(value.get<std::string>())) return *v;
  }
  throw SchemaViolation(context, "expected a number");
}

double get_number(const json& obj, const char* key, const std::string& context) {
  return number_value(require(obj, key, context), context + "." + key);
}

std::string get_string(const json& obj, const char* key, const std::string& context) {
  const auto& v = require(obj, key, context);
  if (!v.is_string()) throw SchemaViolation(context + "." + key, "expected a string");
  return v.get<std::string>();
}

std::vector<double> read_sample_file(const std::filesystem::path& path) {
  const auto table = read_csv(path);
  const auto col = table.require_column("minutes");
  std::vector<double> values;
  values.reserve(table.size());
  for (std::size_t r = 0; r < table.size(); ++r) values.push_back(table.number(r, col));
  return values;
}

void write_sample_file(const std::filesystem::path& path, const std::vector<double>& values) {
  std::ostringstream out;
  out << "minutes\n";
  for (double v : values) out << format_double(v) << '\n';
  write_text_file(path, out.str());
}

Distribution distribution_from_json(const json& j, const std::filesystem::path& base_dir,
                                    const std::string& context) {
  const std::string kind = get_string(j, "kind", context);
  bool truncate = false;
  if (auto it = j.find("truncate_at_zero"); it != j.end()) {
    if (!it->is_boolean()) throw SchemaViolation(context + ".truncate_at_zero", "expected a boolean");
    truncate = it->get<bool>();
  }
  try {
    if (kind == "constant") return Distribution::constant(get_number(j, "value", context), truncate);
    if (kind == "never") return Distribution::never();
    if (kind == "exponential") {
      return Distribution::exponential(get_number(j, "mean", context), truncate);
    }
    if (kind == "triangular") {
      return Distribution::triangular(get_number(j, "low", context), get_number(j, "mode", context),
                                      get_number(j, "high", context), truncate);
    }
    if (kind == "empirical") {
      std::vector<double> values;
      if (auto it = j.find("values"); it != j.end()) {
        if (!it->is_array()) throw SchemaViolation(context + ".values", "expected an array");
        for (const auto& v : *it) values.push_back(number_value(v, context + ".values"));
      } else {
        values = read_sample_file(base_dir / get_string(j, "file", context));
      }
      if (values.empty()) throw SchemaViolation(context, "empirical distribution has no values");
      return Distribution::empirical(values, truncate);
    }
  } catch (const InvariantViolation& e) {
    throw InvariantViolation(context + ": " + e.what());
  }
  throw SchemaViolation(context + ".kind", "unknown distribution kind '" + kind + "'");
}

json distribution_to_json(const Distribution& dist, const std::filesystem::path& dir,
                          const std::string& sample_name) {
  json j;
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ConstantDist>) {
          j["kind"] = "constant";
          if (std::isinf(d.value)) {
            j["value"] = "inf";
          } else {
            j["value"] = d.value;
          }
        } else if constexpr (std::is_same_v<T, ExponentialDist>) {
          j["kind"] = "exponential";
          j["mean"] = d.mean;
        } else if constexpr (std::is_same_v<T, TriangularDist>) {
          j["kind"] = "triangular";
          j["low"] = d.low;
          j["mode"] = d.mode;
          j["high"] = d.high;
        } else {
          j["kind"] = "empirical";
          const std::string rel = "samples/" + sample_name + ".csv";
          write_sample_file(dir / rel, d.values);
          j["file"] = rel;
        }
      },
      dist.kind());
  if (dist.truncate_at_zero()) j["truncate_at_zero"] = true;
  return j;
}

}  // namespace emsim::detail
