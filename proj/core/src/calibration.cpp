#include "emsim/calibration.hpp"

#include "emsim/distribution.hpp"
#include "emsim/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

namespace emsim {

FilterResult filter_observations(std::span<const CalibrationObservation> raw,
                                 std::pair<double, double> ratio_bounds) {
  const auto [lo, hi] = ratio_bounds;
  if (!(lo > 0.0 && lo < hi)) throw InvariantViolation("ratio bounds must satisfy 0 < lo < hi");
  FilterResult out;
  for (const auto& o : raw) {
    const double ratio = o.t_obs / o.t_rs;
    if (o.t_rs > 0.0 && ratio >= lo && ratio <= hi) {
      out.kept.push_back(o);
    } else {
      out.removed.push_back(o);
    }
  }
  return out;
}

double l1_objective(std::span<const CalibrationObservation> obs, double alpha) {
  double total = 0.0;
  for (const auto& o : obs) total += std::abs(alpha * o.t_rs - o.t_obs);
  return total;
}

double estimate_alpha(std::span<const CalibrationObservation> obs) {
  if (obs.empty()) throw EmptyObservations();

  std::vector<std::pair<double, double>> ratio_weight;
  ratio_weight.reserve(obs.size());
  double total = 0.0;
  for (const auto& o : obs) {
    if (!(o.t_rs > 0.0) || !(o.t_obs > 0.0)) {
      throw InvariantViolation("calibration observation with non-positive time");
    }
    ratio_weight.emplace_back(o.t_obs / o.t_rs, o.t_rs);
    total += o.t_rs;
  }
  std::sort(ratio_weight.begin(), ratio_weight.end());

  // First breakpoint where the cumulative weight reaches half of the total;
  // at exact equality the objective is flat to the right, so this is the
  // lower end of the optimal interval.
  double cumulative = 0.0;
  for (const auto& [ratio, weight] : ratio_weight) {
    cumulative += weight;
    if (2.0 * cumulative >= total) return ratio;
  }
  return ratio_weight.back().first;
}

void CalibrationTable::set(const CalibrationKey& key, CalibrationEntry entry) {
  if (!(entry.alpha > 0.0) || !std::isfinite(entry.alpha)) {
    throw InvariantViolation("calibration factor must be positive and finite");
  }
  entries_[key] = entry;
}

double CalibrationTable::alpha(TravelLeg leg, std::string_view slot, UrgencyClass urgency) const {
  auto it = entries_.find(CalibrationKey{leg, std::string(slot), urgency});
  return it == entries_.end() ? 1.0 : it->second.alpha;
}

BuildTableResult build_table(std::span<const CalibrationObservation> all_obs,
                             const BuildTableOptions& options) {
  if (options.min_count < 1) throw InvariantViolation("min_count must be at least 1");

  auto filtered = filter_observations(all_obs, options.ratio_bounds);

  std::map<CalibrationKey, std::vector<CalibrationObservation>> groups;
  for (const auto& slot : options.slot_ids) {
    for (auto leg : options.legs) {
      for (auto u : kAllUrgencies) groups[CalibrationKey{leg, slot, u}];
    }
  }
  // Groups that only had filtered-out observations still count as defaulted.
  for (const auto& o : filtered.removed) groups[CalibrationKey{o.leg, o.slot, o.urgency}];
  for (auto& o : filtered.kept) groups[CalibrationKey{o.leg, o.slot, o.urgency}].push_back(o);

  BuildTableResult result;
  result.removed_by_filter = filtered.removed.size();
  result.groups_total = groups.size();
  for (const auto& [key, obs] : groups) {
    if (obs.size() >= options.min_count) {
      result.table.set(key, CalibrationEntry{estimate_alpha(obs), obs.size()});
    } else {
      result.defaulted.emplace_back(key, obs.size());
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// TravelTimeModel
// ---------------------------------------------------------------------------

TravelTimeModel::TravelTimeModel(const NetworkModel& network, std::vector<NominalTravel> nominal,
                                 CalibrationTable calibration, std::array<double, kLegCount> delta,
                                 std::vector<TimeSlot> slots)
    : rows_(std::move(nominal)),
      calibration_(std::move(calibration)),
      delta_(delta),
      slots_(std::move(slots)),
      n_(network.size()),
      slot_index_(slots_) {
  for (double d : delta_) {
    if (!(d >= 0.0) || !std::isfinite(d)) throw InvariantViolation("noise delta must be >= 0");
  }

  std::sort(rows_.begin(), rows_.end(), [](const NominalTravel& a, const NominalTravel& b) {
    return std::tie(a.leg, a.origin, a.destination) < std::tie(b.leg, b.origin, b.destination);
  });

  point_ids_.reserve(n_);
  point_kinds_.reserve(n_);
  for (const auto& p : network.points()) {
    point_ids_.push_back(p.id);
    point_kinds_.push_back(p.kind);
  }

  for (auto& m : dense_) m.assign(n_ * n_, std::numeric_limits<double>::quiet_NaN());
  for (const auto& row : rows_) {
    const auto o = network.require(row.origin, std::nullopt, "travel time origin");
    const auto d = network.require(row.destination, std::nullopt, "travel time destination");
    if (!(row.minutes > 0.0) || !std::isfinite(row.minutes)) {
      throw InvariantViolation("nominal travel time must be positive: " + row.origin + " -> " +
                               row.destination);
    }
    double& cell = dense_[index_of(row.leg)][o * n_ + d];
    if (!std::isnan(cell)) {
      throw InvariantViolation("duplicate nominal travel row " + row.origin + " -> " +
                               row.destination + " (" + std::string(to_string(row.leg)) + ")");
    }
    cell = row.minutes;
  }

  for (auto leg : kAllLegs) {
    auto& a = alpha_[index_of(leg)];
    a.assign(slots_.size() * 2, 1.0);
    for (std::size_t s = 0; s < slots_.size(); ++s) {
      for (auto u : kAllUrgencies) a[s * 2 + index_of(u)] = calibration_.alpha(leg, slots_[s].id, u);
    }
  }
  for (const auto& [key, entry] : calibration_.entries()) {
    const bool known = std::any_of(slots_.begin(), slots_.end(),
                                   [&](const TimeSlot& s) { return s.id == key.slot; });
    if (!known) throw CrossRefError(key.slot, "calibration table slot");
  }
}

bool TravelTimeModel::has(std::size_t origin, std::size_t destination, TravelLeg leg) const noexcept {
  return origin < n_ && destination < n_ && !std::isnan(dense_[index_of(leg)][origin * n_ + destination]);
}

double TravelTimeModel::nominal(std::size_t origin, std::size_t destination, TravelLeg leg) const {
  if (!has(origin, destination, leg)) {
    throw UnknownPair(origin < n_ ? point_ids_[origin] : "#" + std::to_string(origin),
                      destination < n_ ? point_ids_[destination] : "#" + std::to_string(destination),
                      std::string(to_string(leg)));
  }
  return dense_[index_of(leg)][origin * n_ + destination];
}

std::size_t TravelTimeModel::slot_index(std::string_view slot_id) const {
  for (std::size_t s = 0; s < slots_.size(); ++s) {
    if (slots_[s].id == slot_id) return s;
  }
  throw CrossRefError(std::string(slot_id), "travel time slots");
}

double TravelTimeModel::noisy(double t, std::size_t destination, TravelLeg leg,
                              RngStream* stream) const {
  const double d = delta_[index_of(leg)];
  if (stream == nullptr || d <= 0.0 || point_kinds_[destination] != PointKind::DemandSquare) {
    return t;
  }
  return sample_triangular_travel(t, d, *stream);
}

double TravelTimeModel::travel_time(std::size_t origin, std::size_t destination, TravelLeg leg,
                                    double now, UrgencyClass urgency, RngStream* stream) const {
  return noisy(calibrated(origin, destination, leg, now, urgency), destination, leg, stream);
}

double TravelTimeModel::travel_time_u(std::size_t origin, std::size_t destination, TravelLeg leg,
                                      double now, UrgencyClass urgency,
                                      std::optional<double> u) const {
  const double t = calibrated(origin, destination, leg, now, urgency);
  if (!u || !noisy_leg(destination, leg)) return t;
  return triangular_travel_quantile(t, delta_[index_of(leg)], *u);
}

double TravelTimeModel::travel_time(std::string_view origin, std::string_view destination,
                                    TravelLeg leg, std::string_view slot_id, UrgencyClass urgency,
                                    RngStream* stream) const {
  auto find = [this](std::string_view id) -> std::size_t {
    for (std::size_t i = 0; i < point_ids_.size(); ++i) {
      if (point_ids_[i] == id) return i;
    }
    return n_;
  };
  const auto o = find(origin);
  const auto d = find(destination);
  if (!has(o, d, leg)) {
    throw UnknownPair(std::string(origin), std::string(destination), std::string(to_string(leg)));
  }
  const double t = alpha(leg, slot_index(slot_id), urgency) * nominal(o, d, leg);
  return noisy(t, d, leg, stream);
}

}  // namespace emsim
