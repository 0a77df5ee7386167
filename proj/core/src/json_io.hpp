#pragma once
// Internal helpers shared by the loaders and writers; not installed.

#include "emsim/distribution.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace emsim::detail {

using json = nlohmann::ordered_json;

json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& doc);

const json& require(const json& obj, const char* key, const std::string& context);
double get_number(const json& obj, const char* key, const std::string& context);
double number_value(const json& value, const std::string& context);
std::string get_string(const json& obj, const char* key, const std::string& context);

/// Single-column CSV ("minutes") of sample values.
std::vector<double> read_sample_file(const std::filesystem::path& path);
void write_sample_file(const std::filesystem::path& path, const std::vector<double>& values);

/// {"kind": constant|exponential|triangular|empirical, ...}. Empirical values
/// are given inline ("values") or by "file", relative to `base_dir`.
Distribution distribution_from_json(const json& j, const std::filesystem::path& base_dir,
                                    const std::string& context);
/// Empirical values are written to `<dir>/samples/<sample_name>.csv` and
/// referenced by relative path.
json distribution_to_json(const Distribution& dist, const std::filesystem::path& dir,
                          const std::string& sample_name);

}  // namespace emsim::detail
