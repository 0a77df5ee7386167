#pragma once

#include "emsim/demand.hpp"
#include "emsim/instance.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace emsim {

namespace rieti {

inline constexpr std::array<std::string_view, 5> kZones{"Antrodoco", "Mirtense", "Rieti", "S_Elpidio", "Salario"};

/// Daily demand slots 00-07, 07-12, 12-18, 18-24.
inline constexpr std::array<double, 5> kSlotBoundaries{0, 420, 720, 1080, 1440};

/// Annual calls per zone (kZones order) and demand slot.
inline constexpr std::array<std::array<double, 4>, 5> kAnnualCalls{{
    {104, 270, 349, 246},
    {389, 805, 989, 805},
    {839, 1925, 2247, 1742},
    {99, 184, 217, 153},
    {353, 640, 814, 704},
}};

inline constexpr double kUrgentCalls = 10399;
inline constexpr double kNonUrgentCalls = 1715;
inline constexpr double kUrgentShare = kUrgentCalls / (kUrgentCalls + kNonUrgentCalls);

/// Travel-time corrections per period of the five-period week, columns
/// {non-urgent base-scene, non-urgent scene-ED, urgent base-scene, urgent scene-ED}.
inline constexpr std::array<std::string_view, 5> kPeriods{"weekday_peak", "weekday_offpeak", "weekday_night",
                                                          "weekend_offpeak", "weekend_night"};
inline constexpr std::array<std::array<double, 4>, 5> kCorrection{{
    {0.904, 0.964, 0.867, 0.919},
    {0.894, 0.943, 0.914, 0.868},
    {0.887, 1.064, 0.920, 0.959},
    {0.902, 0.902, 0.949, 0.878},
    {0.894, 1.038, 0.888, 0.993},
}};

inline constexpr double kNoiseDelta = 3.0;
inline constexpr double kMeasuredDays = 365.0;

}  // namespace rieti

/// Builds the synthetic rieti-like instance: 12 bases, 3 candidate sites,
/// 13 EDs, 5 zones, about 270 call squares. `history` receives the synthetic
/// call locations the square grid was built from. Same seed, same instance.
SimulationInstance make_rieti_like(std::uint64_t seed, std::vector<HistoricalCall>* history = nullptr);

struct SynthFiles {
  std::filesystem::path instance;      ///< instance.json
  std::filesystem::path history;       ///< historical_calls.csv
  std::filesystem::path missions;      ///< missions.csv
  std::filesystem::path observations;  ///< observations.csv
  std::filesystem::path targets;       ///< targets.csv
};

/// Writes the instance plus a synthetic historical record: one simulated
/// year of the default scenario under an independent seed, exported as
/// missions, calibration observations and KPI targets. Throws
/// SchemaViolation for an unknown profile.
SynthFiles write_synth(const std::filesystem::path& dir, std::string_view profile, std::uint64_t seed);

}  // namespace emsim
