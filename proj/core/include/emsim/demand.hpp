#pragma once

#include "emsim/distribution.hpp"
#include "emsim/rng.hpp"
#include "emsim/time_slots.hpp"
#include "emsim/types.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace emsim {

/// What to do when an interarrival draw crosses the end of its time slot.
enum class SlotBoundaryPolicy : std::uint8_t {
  Keep,      ///< the draw stands
  Resample,  ///< restart at the boundary with the next slot's distribution
};

/// Where inside a call square the patient is placed.
enum class LocationRule : std::uint8_t {
  RepresentativePoint,  ///< the square's representative historical location
  HistoricalSample,     ///< uniform pick among the square's sample points
};

std::string_view to_string(SlotBoundaryPolicy policy) noexcept;
std::string_view to_string(LocationRule rule) noexcept;
SlotBoundaryPolicy parse_slot_boundary_policy(std::string_view text);
LocationRule parse_location_rule(std::string_view text);

struct CallSquare {
  std::string id;
  std::string zone;
  std::string point;  ///< representative DemandSquare point id
  double area_km2 = 10.0;
  std::vector<std::string> sample_points;  ///< optional alternatives for HistoricalSample

  // Resolved network indices (filled by the loader).
  std::size_t point_index = 0;
  std::vector<std::size_t> sample_point_indices;

  bool operator==(const CallSquare&) const = default;
};

struct WeightedSquare {
  std::size_t square = 0;  ///< index into DemandModel::squares
  double weight = 1.0;     ///< historical call count
  bool operator==(const WeightedSquare&) const = default;
};

struct GenerationZone {
  std::string id;
  std::vector<Distribution> interarrival;  ///< one per demand time slot
  std::vector<WeightedSquare> squares;
  std::array<double, 4> tag_probabilities{};  ///< indexed by SeverityTag value
  std::vector<std::pair<std::string, double>> referral;  ///< group -> probability

  bool operator==(const GenerationZone&) const = default;
};

struct DemandModel {
  DemandTimeSlotScheme scheme;
  SlotBoundaryPolicy policy = SlotBoundaryPolicy::Keep;
  LocationRule location_rule = LocationRule::RepresentativePoint;
  std::vector<GenerationZone> zones;
  std::vector<CallSquare> squares;

  bool operator==(const DemandModel&) const = default;
};

enum class CallStatus : std::uint8_t {
  Queued,
  Assigned,
  EnRoute,
  CancelledEnRoute,
  ClosedOnSite,
  Transported,
};

std::string_view to_string(CallStatus status) noexcept;
CallStatus parse_call_status(std::string_view text);
constexpr bool is_terminal(CallStatus s) noexcept {
  return s == CallStatus::CancelledEnRoute || s == CallStatus::ClosedOnSite ||
         s == CallStatus::Transported;
}

struct CallTimestamps {
  std::optional<double> triage_done;
  std::optional<double> assigned;
  std::optional<double> depart_base;
  std::optional<double> arrive_scene;
  std::optional<double> depart_scene;
  std::optional<double> arrive_ed;
  std::optional<double> offload_start;
  std::optional<double> offload_done;
  std::optional<double> mission_end;

  bool operator==(const CallTimestamps&) const = default;
};

struct EmergencyCall {
  std::uint64_t call_id = 0;
  double arrival_minute = 0.0;
  std::size_t zone = 0;
  std::size_t square = 0;
  std::size_t scene_point = 0;  ///< network index of the patient location
  SeverityTag triage_tag = SeverityTag::Yellow;
  std::optional<SeverityTag> onscene_tag;
  std::string pathology_group;
  CallTimestamps ts;
  CallStatus status = CallStatus::Queued;

  /// Urgency from the latest known tag.
  UrgencyClass urgency() const noexcept { return urgency_of(onscene_tag.value_or(triage_tag)); }
  UrgencyClass triage_urgency() const noexcept { return urgency_of(triage_tag); }
  /// arrival <= triage_done <= assigned <= ... <= mission_end over present stamps.
  bool timestamps_monotone() const noexcept;

  bool operator==(const EmergencyCall&) const = default;
};

/// Demand-side random streams of one zone in one replication.
struct ZoneStreams {
  ZoneStreams(std::uint64_t base_seed, std::uint64_t replication, std::string_view zone_id);

  RngStream arrivals;
  RngStream locations;
  RngStream tags;
  RngStream referral;
};

/// Next call time of `zone` after `now`. Returns +inf when every slot of the
/// zone has the never-sentinel distribution.
double next_arrival(const GenerationZone& zone, double now, const DemandTimeSlotScheme& scheme,
                    SlotBoundaryPolicy policy, RngStream& stream);

/// Weighted draw of a square of `zone`; returns an index into DemandModel::squares.
std::size_t pick_square(const GenerationZone& zone, RngStream& stream);

/// Categorical draw over `weights` (need not be normalised, must be >= 0 with
/// a positive sum).
std::size_t pick_categorical(std::span<const double> weights, RngStream& stream);

/// Builds the call record for an arrival in `zone_index` at `now`.
EmergencyCall spawn_call(const DemandModel& demand, std::size_t zone_index, std::uint64_t call_id,
                         double now, ZoneStreams& streams);

// ---------------------------------------------------------------------------
// Demand grid construction from historical call locations
// ---------------------------------------------------------------------------

struct HistoricalCall {
  double x = 0.0;
  double y = 0.0;
  std::string zone;  ///< optional
};

struct BoundingBox {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;
};

BoundingBox bounding_box(std::span<const HistoricalCall> calls);

struct GridSquare {
  std::string id;  ///< "SQ<row>_<col>", zero padded
  std::size_t row = 0;
  std::size_t col = 0;
  double cx = 0.0;  ///< centroid
  double cy = 0.0;
  std::size_t rep_index = 0;  ///< index of the representative call in the input
  double rep_x = 0.0;
  double rep_y = 0.0;
  std::size_t weight = 0;  ///< number of calls in the cell
  std::string zone;        ///< majority zone of the calls, ties to the smaller id

  bool operator==(const GridSquare&) const = default;
};

/// Square grid of side sqrt(cell_area_km2) km anchored at the box minimum.
/// Only cells with at least one call are returned, ordered by (row, col).
/// The representative is the call nearest to the cell centroid, ties going
/// to the lowest input index. Throws EmptyHistory, InvariantViolation when
/// the area is not positive or a call lies outside the box.
std::vector<GridSquare> build_demand_grid(std::span<const HistoricalCall> calls,
                                          double cell_area_km2, const BoundingBox& bbox);

}  // namespace emsim
