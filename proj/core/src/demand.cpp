#include "emsim/demand.hpp"

#include "emsim/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <unordered_map>

namespace emsim {

std::string_view to_string(SlotBoundaryPolicy policy) noexcept {
  return policy == SlotBoundaryPolicy::Keep ? "keep" : "resample";
}

std::string_view to_string(LocationRule rule) noexcept {
  return rule == LocationRule::RepresentativePoint ? "representative" : "historical_sample";
}

SlotBoundaryPolicy parse_slot_boundary_policy(std::string_view text) {
  if (text == "keep") return SlotBoundaryPolicy::Keep;
  if (text == "resample") return SlotBoundaryPolicy::Resample;
  throw SchemaViolation("slot_boundary_policy", "expected keep|resample, got '" + std::string(text) + "'");
}

LocationRule parse_location_rule(std::string_view text) {
  if (text == "representative") return LocationRule::RepresentativePoint;
  if (text == "historical_sample") return LocationRule::HistoricalSample;
  throw SchemaViolation("location_rule",
                        "expected representative|historical_sample, got '" + std::string(text) + "'");
}

std::string_view to_string(CallStatus status) noexcept {
  switch (status) {
    case CallStatus::Queued: return "Queued";
    case CallStatus::Assigned: return "Assigned";
    case CallStatus::EnRoute: return "EnRoute";
    case CallStatus::CancelledEnRoute: return "CancelledEnRoute";
    case CallStatus::ClosedOnSite: return "ClosedOnSite";
    case CallStatus::Transported: return "Transported";
  }
  return "?";
}

CallStatus parse_call_status(std::string_view text) {
  for (auto s : {CallStatus::Queued, CallStatus::Assigned, CallStatus::EnRoute,
                 CallStatus::CancelledEnRoute, CallStatus::ClosedOnSite, CallStatus::Transported}) {
    if (to_string(s) == text) return s;
  }
  throw SchemaViolation("status", "unknown call status '" + std::string(text) + "'");
}

bool EmergencyCall::timestamps_monotone() const noexcept {
  double last = arrival_minute;
  for (const auto& stamp : {ts.triage_done, ts.assigned, ts.depart_base, ts.arrive_scene,
                            ts.depart_scene, ts.arrive_ed, ts.offload_start, ts.offload_done,
                            ts.mission_end}) {
    if (!stamp) continue;
    if (*stamp < last) return false;
    last = *stamp;
  }
  return true;
}

ZoneStreams::ZoneStreams(std::uint64_t base_seed, std::uint64_t replication, std::string_view zone_id)
    : arrivals(base_seed, replication, "arrivals/" + std::string(zone_id)),
      locations(base_seed, replication, "locations/" + std::string(zone_id)),
      tags(base_seed, replication, "tags/" + std::string(zone_id)),
      referral(base_seed, replication, "referral/" + std::string(zone_id)) {}

double next_arrival(const GenerationZone& zone, double now, const DemandTimeSlotScheme& scheme,
                    SlotBoundaryPolicy policy, RngStream& stream) {
  const bool any_finite = std::any_of(zone.interarrival.begin(), zone.interarrival.end(),
                                      [](const Distribution& d) { return !d.is_never(); });
  if (!any_finite) return std::numeric_limits<double>::infinity();

  double t = now;
  for (;;) {
    const auto& dist = zone.interarrival[scheme.slot_at(t)];
    const double slot_end = scheme.slot_end(t);
    if (dist.is_never()) {
      t = slot_end;  // no calls in this slot
      continue;
    }
    const double candidate = t + dist.sample(stream);
    if (policy == SlotBoundaryPolicy::Keep || candidate <= slot_end) return candidate;
    t = slot_end;
  }
}

std::size_t pick_categorical(std::span<const double> weights, RngStream& stream) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw InvariantViolation("categorical weights must have a positive sum");
  const double target = stream.uniform() * total;
  double cumulative = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    cumulative += weights[i];
    if (target < cumulative) return i;
  }
  // Rounding at the top end: last positive weight.
  for (std::size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0.0) return i;
  }
  return weights.size() - 1;
}

std::size_t pick_square(const GenerationZone& zone, RngStream& stream) {
  if (zone.squares.empty()) throw InvariantViolation("zone '" + zone.id + "' has no squares");
  if (zone.squares.size() == 1) return zone.squares.front().square;
  std::vector<double> weights;
  weights.reserve(zone.squares.size());
  for (const auto& s : zone.squares) weights.push_back(s.weight);
  return zone.squares[pick_categorical(weights, stream)].square;
}

EmergencyCall spawn_call(const DemandModel& demand, std::size_t zone_index, std::uint64_t call_id,
                         double now, ZoneStreams& streams) {
  const auto& zone = demand.zones.at(zone_index);
  EmergencyCall call;
  call.call_id = call_id;
  call.arrival_minute = now;
  call.zone = zone_index;
  call.square = pick_square(zone, streams.locations);

  const auto& square = demand.squares.at(call.square);
  call.scene_point = square.point_index;
  if (demand.location_rule == LocationRule::HistoricalSample && !square.sample_point_indices.empty()) {
    call.scene_point =
        square.sample_point_indices[streams.locations.below(square.sample_point_indices.size())];
  }

  call.triage_tag = static_cast<SeverityTag>(pick_categorical(zone.tag_probabilities, streams.tags));

  std::vector<double> group_weights;
  group_weights.reserve(zone.referral.size());
  for (const auto& [group, p] : zone.referral) group_weights.push_back(p);
  call.pathology_group = zone.referral.at(pick_categorical(group_weights, streams.referral)).first;
  return call;
}

BoundingBox bounding_box(std::span<const HistoricalCall> calls) {
  if (calls.empty()) throw EmptyHistory();
  BoundingBox b{calls[0].x, calls[0].y, calls[0].x, calls[0].y};
  for (const auto& c : calls) {
    b.min_x = std::min(b.min_x, c.x);
    b.min_y = std::min(b.min_y, c.y);
    b.max_x = std::max(b.max_x, c.x);
    b.max_y = std::max(b.max_y, c.y);
  }
  return b;
}

std::vector<GridSquare> build_demand_grid(std::span<const HistoricalCall> calls,
                                          double cell_area_km2, const BoundingBox& bbox) {
  if (calls.empty()) throw EmptyHistory();
  if (!(cell_area_km2 > 0.0)) throw InvariantViolation("cell area must be positive");
  const double side = std::sqrt(cell_area_km2) * 1000.0;  // meters
  const auto cols = static_cast<std::size_t>(std::max(1.0, std::ceil((bbox.max_x - bbox.min_x) / side)));
  const auto rows = static_cast<std::size_t>(std::max(1.0, std::ceil((bbox.max_y - bbox.min_y) / side)));

  auto cell_of = [&](double v, double lo, std::size_t count) {
    auto i = static_cast<std::size_t>(std::floor((v - lo) / side));
    return std::min(i, count - 1);  // points on the upper edge fall in the last cell
  };

  struct Acc {
    std::size_t weight = 0;
    std::size_t rep = 0;
    double best = std::numeric_limits<double>::infinity();
    std::map<std::string, std::size_t> zones;
  };
  std::map<std::pair<std::size_t, std::size_t>, Acc> cells;

  for (std::size_t i = 0; i < calls.size(); ++i) {
    const auto& c = calls[i];
    if (c.x < bbox.min_x || c.x > bbox.max_x || c.y < bbox.min_y || c.y > bbox.max_y) {
      throw InvariantViolation("historical call " + std::to_string(i) + " lies outside the bounding box");
    }
    const auto col = cell_of(c.x, bbox.min_x, cols);
    const auto row = cell_of(c.y, bbox.min_y, rows);
    auto& acc = cells[{row, col}];
    ++acc.weight;
    if (!c.zone.empty()) ++acc.zones[c.zone];
    const double cx = bbox.min_x + (static_cast<double>(col) + 0.5) * side;
    const double cy = bbox.min_y + (static_cast<double>(row) + 0.5) * side;
    const double d2 = (c.x - cx) * (c.x - cx) + (c.y - cy) * (c.y - cy);
    if (d2 < acc.best) {  // strict: earlier index wins ties
      acc.best = d2;
      acc.rep = i;
    }
  }

  std::vector<GridSquare> out;
  out.reserve(cells.size());
  for (const auto& [rc, acc] : cells) {
    const auto [row, col] = rc;
    GridSquare sq;
    char id[32];
    std::snprintf(id, sizeof id, "SQ%03zu_%03zu", row, col);
    sq.id = id;
    sq.row = row;
    sq.col = col;
    sq.cx = bbox.min_x + (static_cast<double>(col) + 0.5) * side;
    sq.cy = bbox.min_y + (static_cast<double>(row) + 0.5) * side;
    sq.rep_index = acc.rep;
    sq.rep_x = calls[acc.rep].x;
    sq.rep_y = calls[acc.rep].y;
    sq.weight = acc.weight;
    std::size_t best = 0;
    for (const auto& [zone, n] : acc.zones) {  // map order: ties keep the smaller id
      if (n > best) {
        best = n;
        sq.zone = zone;
      }
    }
    out.push_back(std::move(sq));
  }
  return out;
}

}  // namespace emsim
