#include "emsim/time_slots.hpp"

#include "emsim/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>

namespace emsim {

std::vector<PartitionIssue> validate_week_partition(std::span<const TimeSlot> slots) {
  std::vector<PartitionIssue> issues;

  // Sweep over all range endpoints; between consecutive breakpoints the set
  // of covering slots is constant.
  std::map<double, std::vector<std::pair<std::size_t, int>>> deltas;
  for (std::size_t s = 0; s < slots.size(); ++s) {
    for (const auto& r : slots[s].minute_ranges) {
      if (!(r.start < r.end)) {
        issues.push_back({PartitionIssue::Kind::EmptyRange, r.start, r.end, {slots[s].id}});
        continue;
      }
      if (r.start < 0.0 || r.end > kMinutesPerWeek) {
        issues.push_back({PartitionIssue::Kind::OutOfRange, r.start, r.end, {slots[s].id}});
      }
      const double lo = std::clamp(r.start, 0.0, kMinutesPerWeek);
      const double hi = std::clamp(r.end, 0.0, kMinutesPerWeek);
      if (lo < hi) {
        deltas[lo].emplace_back(s, +1);
        deltas[hi].emplace_back(s, -1);
      }
    }
  }
  deltas.try_emplace(0.0);
  deltas.try_emplace(kMinutesPerWeek);

  std::multiset<std::size_t> active;
  std::optional<PartitionIssue> open;
  auto flush = [&] {
    if (open) {
      issues.push_back(*open);
      open.reset();
    }
  };

  for (auto it = deltas.begin(); it != deltas.end(); ++it) {
    for (auto [slot, d] : it->second) {
      if (d > 0) {
        active.insert(slot);
      } else {
        active.erase(active.find(slot));
      }
    }
    auto next = std::next(it);
    if (next == deltas.end()) break;
    const double seg_lo = it->first;
    const double seg_hi = next->first;

    std::optional<PartitionIssue::Kind> kind;
    std::vector<std::string> names;
    if (active.empty()) {
      kind = PartitionIssue::Kind::Gap;
    } else if (active.size() > 1) {
      kind = PartitionIssue::Kind::Overlap;
      for (std::size_t s : std::set<std::size_t>(active.begin(), active.end())) {
        names.push_back(slots[s].id);
      }
    }

    if (open && kind && open->kind == *kind && open->slots == names && open->end == seg_lo) {
      open->end = seg_hi;
      continue;
    }
    flush();
    if (kind) open = PartitionIssue{*kind, seg_lo, seg_hi, names};
  }
  flush();
  return issues;
}

std::string describe(const PartitionIssue& issue) {
  const char* what = "gap";
  switch (issue.kind) {
    case PartitionIssue::Kind::Gap: what = "gap"; break;
    case PartitionIssue::Kind::Overlap: what = "overlap"; break;
    case PartitionIssue::Kind::OutOfRange: what = "out-of-range interval"; break;
    case PartitionIssue::Kind::EmptyRange: what = "empty interval"; break;
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s [%g, %g)", what, issue.start, issue.end);
  std::string text = buf;
  if (!issue.slots.empty()) {
    text += " slots:";
    for (const auto& s : issue.slots) text += " " + s;
  }
  return text;
}

std::vector<TimeSlot> five_period_week_scheme() {
  TimeSlot wd_peak{"weekday_peak", "WeekdayPeak", {}};
  TimeSlot wd_off{"weekday_offpeak", "WeekdayOffPeak", {}};
  TimeSlot wd_night{"weekday_night", "WeekdayNight", {}};
  TimeSlot we_off{"weekend_offpeak", "WeekendOffPeak", {}};
  TimeSlot we_night{"weekend_night", "WeekendNight", {}};

  constexpr double h = 60.0;
  for (int day = 0; day < 7; ++day) {
    const double d0 = day * kMinutesPerDay;
    if (!is_weekend_day(day)) {
      wd_night.minute_ranges.push_back({d0, d0 + 6 * h});
      wd_off.minute_ranges.push_back({d0 + 6 * h, d0 + 7 * h});
      wd_peak.minute_ranges.push_back({d0 + 7 * h, d0 + 9 * h});
      wd_off.minute_ranges.push_back({d0 + 9 * h, d0 + 17 * h});
      wd_peak.minute_ranges.push_back({d0 + 17 * h, d0 + 19 * h});
      wd_off.minute_ranges.push_back({d0 + 19 * h, d0 + 23 * h});
      wd_night.minute_ranges.push_back({d0 + 23 * h, d0 + 24 * h});
    } else {
      we_night.minute_ranges.push_back({d0, d0 + 6 * h});
      we_off.minute_ranges.push_back({d0 + 6 * h, d0 + 23 * h});
      we_night.minute_ranges.push_back({d0 + 23 * h, d0 + 24 * h});
    }
  }
  return {wd_peak, wd_off, wd_night, we_off, we_night};
}

WeekSlotIndex::WeekSlotIndex(std::span<const TimeSlot> slots) : slot_count_(slots.size()) {
  if (slots.empty()) throw InvariantViolation("time-slot scheme is empty");
  if (slots.size() > 0xFFFF) throw InvariantViolation("too many time slots");
  const auto issues = validate_week_partition(slots);
  if (!issues.empty()) {
    throw InvariantViolation("time slots do not partition the week: " + describe(issues.front()));
  }
  by_minute_.assign(static_cast<std::size_t>(kMinutesPerWeek), 0);
  for (std::size_t s = 0; s < slots.size(); ++s) {
    for (const auto& r : slots[s].minute_ranges) {
      if (r.start != std::floor(r.start) || r.end != std::floor(r.end)) {
        throw InvariantViolation("slot '" + slots[s].id + "' has a non-integral minute bound");
      }
      for (auto m = static_cast<std::size_t>(r.start); m < static_cast<std::size_t>(r.end); ++m) {
        by_minute_[m] = static_cast<std::uint16_t>(s);
      }
    }
  }
}

std::size_t WeekSlotIndex::slot_at(double minute) const noexcept {
  double m = std::fmod(minute, kMinutesPerWeek);
  if (m < 0.0) m += kMinutesPerWeek;
  auto idx = static_cast<std::size_t>(m);
  if (idx >= by_minute_.size()) idx = by_minute_.size() - 1;
  return by_minute_[idx];
}

DemandTimeSlotScheme::DemandTimeSlotScheme(std::vector<double> boundaries_minutes)
    : boundaries_(std::move(boundaries_minutes)) {
  if (boundaries_.size() < 2 || boundaries_.front() != 0.0 || boundaries_.back() != kMinutesPerDay) {
    throw InvariantViolation("demand slot boundaries must start at 0 and end at 1440");
  }
  for (std::size_t i = 1; i < boundaries_.size(); ++i) {
    if (!(boundaries_[i] > boundaries_[i - 1])) {
      throw InvariantViolation("demand slot boundaries must strictly increase");
    }
  }
}

std::size_t DemandTimeSlotScheme::slot_at(double minute) const noexcept {
  double m = std::fmod(minute, kMinutesPerDay);
  if (m < 0.0) m += kMinutesPerDay;
  auto it = std::upper_bound(boundaries_.begin(), boundaries_.end(), m);
  auto idx = static_cast<std::size_t>(std::distance(boundaries_.begin(), it)) - 1;
  return std::min(idx, size() - 1);
}

double DemandTimeSlotScheme::slot_end(double minute) const noexcept {
  const double day_start = std::floor(minute / kMinutesPerDay) * kMinutesPerDay;
  return day_start + boundaries_[slot_at(minute) + 1];
}

std::string DemandTimeSlotScheme::label(std::size_t i) const {
  auto hhmm = [](double m) {
    const int total = static_cast<int>(std::lround(m));
    char buf[8];
    std::snprintf(buf, sizeof buf, "%02d:%02d", (total / 60) % 24, total % 60);
    return std::string(buf);
  };
  return hhmm(boundaries_.at(i)) + "-" + hhmm(boundaries_.at(i + 1));
}

}  // namespace emsim
