#pragma once

#include "emsim/goodness_of_fit.hpp"
#include "emsim/kpi.hpp"

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace emsim {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidationFailed = 2;
inline constexpr int kExitSchemaError = 3;
inline constexpr int kExitInternalBreach = 4;

/// Exit code for an exception escaping a command.
int exit_code_for(const std::exception& e) noexcept;

/// Relative paths of the instance document and every file it references.
std::vector<std::string> instance_input_files(const std::filesystem::path& config);

struct IngestArgs {
  std::filesystem::path missions;
  std::filesystem::path config;
  std::filesystem::path out;
  FitFamily family = FitFamily::Triangular;
  double ks_alpha = 0.05;
};
int cmd_ingest(const IngestArgs& args);

struct CalibrateArgs {
  std::filesystem::path observations;
  /// Instance whose travel slots define the grid; empty = five-period week.
  std::filesystem::path config;
  std::filesystem::path out;
  std::size_t min_count = 5;
  double ratio_lo = 0.2;
  double ratio_hi = 5.0;
};
int cmd_calibrate(const CalibrateArgs& args);

struct SimulateArgs {
  std::filesystem::path config;
  std::filesystem::path out;
  std::optional<std::string> scenario;
  std::optional<std::size_t> replications;
  std::optional<std::uint64_t> seed;
  std::optional<double> horizon_minutes;
  std::optional<double> warmup_minutes;
  std::size_t jobs = 1;
  bool keep_events = false;   ///< events/rep_NNN.log
  bool keep_records = false;  ///< records/rep_NNN.csv
  bool check_invariants = false;
  CoverageBasis basis = CoverageBasis::Triage;
};
/// Throws InternalInvariantBreach when an instrumented run finds a violation.
int cmd_simulate(const SimulateArgs& args);

struct CompareArgs {
  std::filesystem::path baseline;
  std::vector<std::filesystem::path> alternatives;
  std::filesystem::path out;
};
/// Throws SeedMismatch, ReplicationCountMismatch.
int cmd_compare(const CompareArgs& args);

struct SynthArgs {
  std::string profile = "rieti-like";
  std::uint64_t seed = 42;
  std::filesystem::path out;
};
int cmd_synth(const SynthArgs& args);

struct ValidateArgs {
  std::filesystem::path results;
  std::filesystem::path targets;
  std::filesystem::path out;  ///< default: <results>/validation
  double tolerance_pct = 3.0;
  std::vector<std::string> kpis;  ///< default: every target
};
/// Returns kExitValidationFailed when any KPI misses its tolerance.
int cmd_validate(const ValidateArgs& args);

}  // namespace emsim
