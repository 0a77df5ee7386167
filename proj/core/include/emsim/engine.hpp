#pragma once

#include "emsim/demand.hpp"
#include "emsim/instance.hpp"
#include "emsim/rng.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace emsim {

enum class EventKind : std::uint8_t {
  CallArrival,
  TriageDone,
  DispatchDecision,
  ArriveScene,
  SceneDone,
  ArriveED,
  OffloadDone,
  ArriveBase,
  SanitizationDone,
  ShiftStart,
  ShiftEnd,
};

std::string_view to_string(EventKind kind) noexcept;
EventKind parse_event_kind(std::string_view text);

enum class DispatchOrigin : std::uint8_t { None, Base, Field };

std::string_view to_string(DispatchOrigin origin) noexcept;

/// One call's complete trail, the source of every KPI.
struct MissionRecord {
  EmergencyCall call;
  std::optional<std::size_t> ambulance;  ///< index into the fleet
  std::string ambulance_id;
  std::string home_base;
  DispatchOrigin origin = DispatchOrigin::None;
  std::string ed;            ///< empty unless transported
  bool in_warmup = false;    ///< arrival before the warm-up end
  bool censored = false;     ///< still open at the horizon
  bool was_queued = false;   ///< waited in the dispatch queue
  /// Sanitization of the serving unit after this mission, when it happened.
  std::optional<double> sanitization_start;
  std::optional<double> sanitization_end;

  /// arrive_scene - arrival for calls served on scene (closed or
  /// transported); nullopt otherwise.
  std::optional<double> response_time() const;
};

/// A fired calendar event or a logged dispatch assignment.
struct EventLogEntry {
  double time = 0.0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::CallArrival;
  std::optional<std::uint64_t> call;
  std::optional<std::size_t> ambulance;
};

/// "time,seq,kind,call_id,ambulance_id" with 6-decimal time; absent ids are
/// empty fields.
std::string format_event(const EventLogEntry& e, std::span<const Ambulance> fleet);

struct InvariantReport {
  std::uint64_t checks = 0;
  std::uint64_t violations = 0;
  std::vector<std::string> messages;  ///< first few violations

  bool ok() const noexcept { return violations == 0; }
};

struct RunOptions {
  bool keep_event_log = false;
  bool check_invariants = false;
};

struct ReplicationResult {
  std::size_t replication = 0;
  std::vector<MissionRecord> records;  ///< by call id
  std::vector<EventLogEntry> events;   ///< only with keep_event_log
  std::uint64_t event_count = 0;       ///< log lines, kept or not
  std::string event_digest;            ///< SHA-256 of the canonical log
  InvariantReport invariants;
};

/// Simulates [0, horizon) for one replication. Identical instance and
/// replication index give bit-identical results.
ReplicationResult run_replication(const SimulationInstance& instance, std::size_t replication,
                                  const RunOptions& options = {});

// ---------------------------------------------------------------------------
// Decision rules, exposed for testing
// ---------------------------------------------------------------------------

struct DispatchCandidate {
  std::size_t ambulance = 0;
  double travel_minutes = 0.0;
};

/// Fastest candidate, ties to the lowest ambulance index; nullopt (queue)
/// when there is none or the fastest exceeds `threshold`.
std::optional<DispatchCandidate> choose_ambulance(std::span<const DispatchCandidate> candidates,
                                                  double threshold);

enum class SceneOutcome : std::uint8_t { TreatOnSite, Transport };

struct SceneResolution {
  SeverityTag onscene_tag = SeverityTag::Yellow;
  SceneOutcome outcome = SceneOutcome::Transport;
};

/// Categorical pick over `probs` by inverse transform of u in [0,1).
std::size_t categorical_index(std::span<const double> probs, double u);

/// Draws the on-scene tag from the triage row of `transition` (u_tag) and
/// then treat vs transport from the on-scene tag's outcome row, renormalised
/// over its two on-scene endings (u_outcome).
SceneResolution on_scene_resolution(SeverityTag triage, const TransitionMatrix& transition,
                                    const std::array<OutcomeProbabilities, 4>& outcomes,
                                    double u_tag, double u_outcome);
SceneResolution on_scene_resolution(SeverityTag triage, const TransitionMatrix& transition,
                                    const std::array<OutcomeProbabilities, 4>& outcomes,
                                    RngStream& stream);

/// Index of the ED of `group` nearest to `scene_point` (calibrated scene->ED
/// time), ties to the lexicographically lowest ED id. Throws NoEligibleED.
std::size_t select_ed(std::string_view group, std::size_t scene_point,
                      std::span<const EDFacility> eds, const TravelTimeModel& travel, double now,
                      UrgencyClass urgency);

struct OffloadTimes {
  double aod = 0.0;
  double discharge = 0.0;
  double total() const noexcept { return aod + discharge; }
};

/// AOD occurs when u_flag < aod_probability and then lasts
/// aod_delay.quantile(u_delay); the discharge follows from the catalog.
OffloadTimes offload(const EDFacility& ed, const ServiceTimeCatalog& catalog, UrgencyClass urgency,
                     double u_flag, double u_delay, double u_discharge);
OffloadTimes offload(const EDFacility& ed, const ServiceTimeCatalog& catalog, UrgencyClass urgency,
                     RngStream& stream);

}  // namespace emsim
