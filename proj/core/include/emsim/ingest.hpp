#pragma once

#include "emsim/calibration.hpp"
#include "emsim/engine.hpp"
#include "emsim/goodness_of_fit.hpp"
#include "emsim/instance.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace emsim {

/// One historical mission. Timestamps are minutes from Monday 00:00 of the
/// first week of the data.
struct MissionRow {
  std::uint64_t call_id = 0;
  double call_start = 0.0;
  std::optional<double> triage_end;
  std::optional<double> assigned;
  std::optional<double> depart;
  std::optional<double> arrive_scene;
  std::optional<double> depart_scene;
  std::optional<double> arrive_ed;
  std::optional<double> offload_start;
  std::optional<double> offload_end;
  std::optional<double> mission_end;
  std::string zone;
  double x = 0.0;
  double y = 0.0;
  SeverityTag triage_tag = SeverityTag::Yellow;
  std::optional<SeverityTag> onscene_tag;
  std::string ed_id;
  CallStatus outcome = CallStatus::Transported;
  // Optional columns.
  std::string base_id;
  DispatchOrigin origin = DispatchOrigin::None;  ///< None = not recorded
  std::optional<double> sanitization_start;
  std::optional<double> sanitization_end;

  UrgencyClass triage_urgency() const noexcept { return urgency_of(triage_tag); }
  UrgencyClass scene_urgency() const noexcept { return urgency_of(onscene_tag.value_or(triage_tag)); }
};

/// Throws SchemaViolation (with the file line) on malformed rows.
std::vector<MissionRow> read_missions_csv(const std::filesystem::path& path);
void write_missions_csv(const std::filesystem::path& path, const std::vector<MissionRow>& rows);

/// Terminal, measured records of a simulation run in mission-row form.
std::vector<MissionRow> missions_from_records(const SimulationInstance& inst,
                                              const std::vector<MissionRecord>& records);

using PhaseSamples = std::array<std::array<std::vector<double>, 2>, kPhaseCount>;

/// Durations from consecutive timestamps. Negative differences are dropped.
/// Pre-scene phases use the triage urgency, later ones the on-scene urgency.
PhaseSamples extract_phase_samples(const std::vector<MissionRow>& rows);

struct AodEstimate {
  std::string ed;
  std::size_t arrivals = 0;        ///< missions with arrive_ed and offload_start
  std::vector<double> delays;      ///< positive delays, sorted
  double probability() const noexcept {
    return arrivals == 0 ? 0.0 : static_cast<double>(delays.size()) / static_cast<double>(arrivals);
  }
};
std::vector<AodEstimate> extract_aod(const std::vector<MissionRow>& rows);

/// counts[zone][slot] of call starts, zones in `zones` order. Rows of other
/// zones are ignored.
std::vector<std::vector<std::size_t>> zone_slot_counts(const std::vector<MissionRow>& rows,
                                                       const std::vector<std::string>& zones,
                                                       const DemandTimeSlotScheme& scheme);

/// Index of the square whose representative point is nearest to (x, y),
/// ties to the lowest index.
std::size_t nearest_square(const SimulationInstance& inst, double x, double y);
std::vector<std::size_t> square_weights(const SimulationInstance& inst, const std::vector<MissionRow>& rows);

/// Base-to-scene legs (base dispatches with a known base) and scene-to-ED
/// legs, paired with the nominal times of `inst`.
std::vector<CalibrationObservation> extract_observations(const SimulationInstance& inst,
                                                         const std::vector<MissionRow>& rows);

void write_observations_csv(const std::filesystem::path& path, const std::vector<CalibrationObservation>& obs);
std::vector<CalibrationObservation> read_observations_csv(const std::filesystem::path& path);

struct IngestOptions {
  FitFamily family = FitFamily::Triangular;
  double ks_alpha = 0.05;
};

struct IngestResult {
  PhaseSamples samples;
  ServiceTimeCatalog catalog;
  FitAuditLog audit;
  std::vector<AodEstimate> aod;
  std::vector<std::vector<std::size_t>> zone_slot;
  std::vector<std::size_t> square_weights;
  std::vector<CalibrationObservation> observations;
};

/// Runs every extraction. Throws SchemaViolation listing the phase/urgency
/// pairs left without samples.
IngestResult ingest(const SimulationInstance& inst, const std::vector<MissionRow>& rows,
                    const IngestOptions& options = {});

/// samples/<Phase>_<Urgency>.csv, service_times.json, aod.csv, aod/<ed>.csv,
/// zone_slot_counts.csv, square_weights.csv, observations.csv, fit_audit.csv.
std::vector<std::filesystem::path> write_ingest_outputs(const std::filesystem::path& dir,
                                                        const SimulationInstance& inst,
                                                        const IngestResult& result);

/// calibration.csv (leg,slot,urgency,alpha,n_obs) in the instance format.
void write_calibration_csv(const std::filesystem::path& path, const CalibrationTable& table);
/// Every group of the coverage grid with its count and whether it defaulted.
void write_calibration_report(const std::filesystem::path& path, const BuildTableResult& result);

}  // namespace emsim
