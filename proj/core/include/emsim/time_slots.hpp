#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace emsim {

inline constexpr double kMinutesPerDay = 1440.0;
inline constexpr double kMinutesPerWeek = 10080.0;

/// Simulation minute 0 is Monday 00:00. Days 0-4 are weekdays, 5-6 weekend.
constexpr bool is_weekend_day(int day_of_week) noexcept { return day_of_week >= 5; }

/// Half-open interval [start, end) of minutes of the week.
struct MinuteRange {
  double start = 0.0;
  double end = 0.0;

  bool operator==(const MinuteRange&) const = default;
};

/// A named set of minute-of-week intervals. `week_pattern` is one of
/// WeekdayPeak, WeekdayOffPeak, WeekdayNight, WeekendOffPeak, WeekendNight,
/// or free text for custom schemes.
struct TimeSlot {
  std::string id;
  std::string week_pattern;
  std::vector<MinuteRange> minute_ranges;

  bool operator==(const TimeSlot&) const = default;
};

struct PartitionIssue {
  enum class Kind { Gap, Overlap, OutOfRange, EmptyRange };
  Kind kind;
  double start;
  double end;
  std::vector<std::string> slots;  ///< slots involved (empty for gaps)
};

/// Checks that `slots` partition [0, 10080). Returns an empty list when they
/// do; otherwise one diagnostic per maximal gap or overlap segment and per
/// malformed range. Never throws.
std::vector<PartitionIssue> validate_week_partition(std::span<const TimeSlot> slots);

std::string describe(const PartitionIssue& issue);

/// Travel-time periods: weekday peak (07-09, 17-19), weekday off-peak
/// (06-07, 09-17, 19-23), weekday night (23-06), weekend off-peak (06-23) and
/// weekend night (23-06). Night hours are attributed to the calendar day they
/// fall on.
std::vector<TimeSlot> five_period_week_scheme();

/// O(1) minute-of-week to slot lookup. Requires a valid partition whose
/// bounds are whole minutes (throws InvariantViolation otherwise).
class WeekSlotIndex {
 public:
  WeekSlotIndex() = default;
  explicit WeekSlotIndex(std::span<const TimeSlot> slots);

  /// Slot index for absolute simulation time `minute` (>= 0, wraps weekly).
  std::size_t slot_at(double minute) const noexcept;
  std::size_t size() const noexcept { return slot_count_; }
  bool empty() const noexcept { return slot_count_ == 0; }

 private:
  std::vector<std::uint16_t> by_minute_;
  std::size_t slot_count_ = 0;
};

/// Daily partition used for call interarrival distributions, e.g. the
/// boundaries {0, 420, 720, 1080, 1440} give slots 00-07, 07-12, 12-18, 18-24.
class DemandTimeSlotScheme {
 public:
  DemandTimeSlotScheme() = default;
  /// Throws InvariantViolation unless boundaries start at 0, end at 1440 and
  /// strictly increase.
  explicit DemandTimeSlotScheme(std::vector<double> boundaries_minutes);

  std::size_t size() const noexcept { return boundaries_.empty() ? 0 : boundaries_.size() - 1; }
  std::size_t slot_at(double minute) const noexcept;
  /// Absolute time at which the slot containing `minute` ends.
  double slot_end(double minute) const noexcept;
  /// "HH:MM-HH:MM" label for slot `i`.
  std::string label(std::size_t i) const;
  const std::vector<double>& boundaries() const noexcept { return boundaries_; }
  double slot_length(std::size_t i) const { return boundaries_.at(i + 1) - boundaries_.at(i); }

  bool operator==(const DemandTimeSlotScheme&) const = default;

 private:
  std::vector<double> boundaries_;
};

}  // namespace emsim
