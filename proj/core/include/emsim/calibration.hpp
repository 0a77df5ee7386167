#pragma once

#include "emsim/network.hpp"
#include "emsim/rng.hpp"
#include "emsim/time_slots.hpp"
#include "emsim/types.hpp"

#include <array>
#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace emsim {

/// One historical trip: routing-service estimate vs observed duration.
struct CalibrationObservation {
  TravelLeg leg = TravelLeg::BaseToScene;
  std::string slot;
  UrgencyClass urgency = UrgencyClass::Urgent;
  double t_rs = 0.0;   ///< nominal routing-service minutes, > 0
  double t_obs = 0.0;  ///< observed minutes, > 0

  bool operator==(const CalibrationObservation&) const = default;
};

struct CalibrationKey {
  TravelLeg leg = TravelLeg::BaseToScene;
  std::string slot;
  UrgencyClass urgency = UrgencyClass::Urgent;

  auto operator<=>(const CalibrationKey&) const = default;
  bool operator==(const CalibrationKey&) const = default;
};

struct FilterResult {
  std::vector<CalibrationObservation> kept;
  std::vector<CalibrationObservation> removed;
};

inline constexpr std::pair<double, double> kDefaultRatioBounds{0.2, 5.0};
inline constexpr std::size_t kDefaultMinCount = 5;

/// Keeps observations whose ratio t_obs / t_rs lies in [lo, hi].
/// Throws InvariantViolation unless 0 < lo < hi.
FilterResult filter_observations(std::span<const CalibrationObservation> raw,
                                 std::pair<double, double> ratio_bounds = kDefaultRatioBounds);

/// sum_s |alpha * t_rs(s) - t_obs(s)|
double l1_objective(std::span<const CalibrationObservation> obs, double alpha);

/// Exact minimiser of the L1 objective over alpha > 0.
///
/// The objective equals sum_s t_rs(s) * |alpha - r_s| with r_s = t_obs/t_rs,
/// a convex piecewise-linear function with breakpoints at the ratios, so the
/// minimiser is the t_rs-weighted median of the ratios. When the cumulative
/// weight hits exactly half the total the objective is flat between two
/// breakpoints and the lower one is returned. Throws EmptyObservations.
double estimate_alpha(std::span<const CalibrationObservation> obs);

struct CalibrationEntry {
  double alpha = 1.0;
  std::size_t n_obs = 0;
  bool operator==(const CalibrationEntry&) const = default;
};

/// Multiplicative travel-time corrections per (leg, slot, urgency); missing
/// keys read as 1.0.
class CalibrationTable {
 public:
  /// Throws InvariantViolation unless alpha > 0.
  void set(const CalibrationKey& key, CalibrationEntry entry);
  double alpha(TravelLeg leg, std::string_view slot, UrgencyClass urgency) const;
  const std::map<CalibrationKey, CalibrationEntry>& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }

  bool operator==(const CalibrationTable&) const = default;

 private:
  std::map<CalibrationKey, CalibrationEntry> entries_;
};

struct BuildTableOptions {
  std::size_t min_count = kDefaultMinCount;
  std::pair<double, double> ratio_bounds = kDefaultRatioBounds;
  /// When non-empty, every (leg, slot, urgency) over these slot ids and
  /// `legs` is part of the coverage report even with zero observations.
  std::vector<std::string> slot_ids;
  std::vector<TravelLeg> legs{TravelLeg::BaseToScene, TravelLeg::SceneToED};
};

struct BuildTableResult {
  CalibrationTable table;
  /// Groups that fell back to alpha = 1, with their filtered counts.
  std::vector<std::pair<CalibrationKey, std::size_t>> defaulted;
  std::size_t groups_total = 0;
  std::size_t removed_by_filter = 0;

  double defaulted_pct() const noexcept {
    return groups_total == 0 ? 100.0
                             : 100.0 * static_cast<double>(defaulted.size()) /
                                   static_cast<double>(groups_total);
  }
};

/// Filters, groups and estimates. Groups with fewer than `min_count`
/// filtered observations get no entry and are listed in `defaulted`.
BuildTableResult build_table(std::span<const CalibrationObservation> all_obs,
                             const BuildTableOptions& options = {});

/// Nominal routing-service time for one ordered pair on one leg.
struct NominalTravel {
  std::string origin;
  std::string destination;
  TravelLeg leg = TravelLeg::BaseToScene;
  double minutes = 0.0;

  bool operator==(const NominalTravel&) const = default;
};

/// Calibrated travel times: alpha(leg, slot, urgency) * T_RS, optionally
/// perturbed by triangular location noise on legs that end at a demand
/// square.
class TravelTimeModel {
 public:
  TravelTimeModel() = default;
  /// Throws CrossRefError for unknown point ids, InvariantViolation for
  /// non-positive times, duplicate rows, or an invalid slot partition.
  TravelTimeModel(const NetworkModel& network, std::vector<NominalTravel> nominal,
                  CalibrationTable calibration, std::array<double, kLegCount> delta,
                  std::vector<TimeSlot> slots);

  bool has(std::size_t origin, std::size_t destination, TravelLeg leg) const noexcept;
  /// Throws UnknownPair.
  double nominal(std::size_t origin, std::size_t destination, TravelLeg leg) const;

  double alpha(TravelLeg leg, std::size_t slot_index, UrgencyClass urgency) const noexcept {
    return alpha_[index_of(leg)][slot_index * 2 + index_of(urgency)];
  }
  std::size_t slot_index_at(double minute) const noexcept { return slot_index_.slot_at(minute); }
  std::size_t slot_index(std::string_view slot_id) const;

  /// Deterministic calibrated time at simulation time `now`.
  double calibrated(std::size_t origin, std::size_t destination, TravelLeg leg, double now,
                    UrgencyClass urgency) const {
    return alpha(leg, slot_index_at(now), urgency) * nominal(origin, destination, leg);
  }

  /// Calibrated time, plus triangular noise when `stream` is given, delta for
  /// the leg is positive and the destination is a demand square.
  double travel_time(std::size_t origin, std::size_t destination, TravelLeg leg, double now,
                     UrgencyClass urgency, RngStream* stream) const;
  double travel_time(std::string_view origin, std::string_view destination, TravelLeg leg,
                     std::string_view slot_id, UrgencyClass urgency, RngStream* stream) const;
  /// Same as the stream form but with the noise uniform supplied by the
  /// caller (nullopt = no noise).
  double travel_time_u(std::size_t origin, std::size_t destination, TravelLeg leg, double now,
                       UrgencyClass urgency, std::optional<double> u) const;
  /// True when noise would apply on a leg ending at `destination`.
  bool noisy_leg(std::size_t destination, TravelLeg leg) const noexcept {
    return delta_[index_of(leg)] > 0.0 && destination < n_ &&
           point_kinds_[destination] == PointKind::DemandSquare;
  }

  const std::vector<NominalTravel>& nominal_rows() const noexcept { return rows_; }
  const CalibrationTable& calibration() const noexcept { return calibration_; }
  double delta(TravelLeg leg) const noexcept { return delta_[index_of(leg)]; }
  const std::array<double, kLegCount>& deltas() const noexcept { return delta_; }
  const std::vector<TimeSlot>& slots() const noexcept { return slots_; }

  bool operator==(const TravelTimeModel& other) const {
    return rows_ == other.rows_ && calibration_ == other.calibration_ &&
           delta_ == other.delta_ && slots_ == other.slots_;
  }

 private:
  double noisy(double t, std::size_t destination, TravelLeg leg, RngStream* stream) const;

  std::vector<NominalTravel> rows_;  // canonical order
  CalibrationTable calibration_;
  std::array<double, kLegCount> delta_{};
  std::vector<TimeSlot> slots_;

  std::vector<std::string> point_ids_;
  std::vector<PointKind> point_kinds_;
  std::size_t n_ = 0;
  std::array<std::vector<double>, kLegCount> dense_;  // NaN = absent
  std::array<std::vector<double>, kLegCount> alpha_;
  WeekSlotIndex slot_index_;
};

}  // namespace emsim
