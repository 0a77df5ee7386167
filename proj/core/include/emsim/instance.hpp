#pragma once

#include "emsim/calibration.hpp"
#include "emsim/demand.hpp"
#include "emsim/distribution.hpp"
#include "emsim/network.hpp"
#include "emsim/service_times.hpp"
#include "emsim/types.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace emsim {

struct EDFacility {
  std::string point;
  std::vector<std::string> referral_groups;
  double aod_probability = 0.0;
  Distribution aod_delay = Distribution::constant(0.0);

  std::size_t point_index = 0;  ///< resolved by the loader

  bool operator==(const EDFacility&) const = default;
};

/// Mission ending probabilities for one severity tag.
struct OutcomeProbabilities {
  double cancel_en_route = 0.0;
  double treat_on_site = 0.0;
  double transport = 1.0;

  bool operator==(const OutcomeProbabilities&) const = default;
};

/// Probability that a unit needs sanitization after a mission. The duration
/// comes from the Sanitization phase of the service-time catalog.
struct SanitizationModel {
  double probability = 0.0;
  bool operator==(const SanitizationModel&) const = default;
};

struct BaseAllocation {
  std::string base;
  unsigned h24 = 0;
  unsigned h12 = 0;
  bool operator==(const BaseAllocation&) const = default;
};

struct FleetScenario {
  std::string name;
  std::vector<BaseAllocation> allocations;
  double dispatch_threshold_minutes = 60.0;
  std::optional<double> threshold_urgent;
  std::optional<double> threshold_nonurgent;
  double h12_on_minute = 480.0;    ///< minute of day the H12 shift starts
  double h12_off_minute = 1200.0;  ///< minute of day it ends

  unsigned total_vehicles() const noexcept;
  double threshold_for(UrgencyClass urgency) const noexcept;
  unsigned h24_at(std::string_view base) const noexcept;
  unsigned h12_at(std::string_view base) const noexcept;

  bool operator==(const FleetScenario&) const = default;
};

enum class Schedule : std::uint8_t { H24, H12 };

/// One vehicle of the active scenario. Vehicles are numbered in allocation
/// order (H24 units of a base before its H12 units); the index doubles as the
/// tie-breaking id.
struct Ambulance {
  std::size_t index = 0;
  std::string id;  ///< "<base>-H24-<k>" / "<base>-H12-<k>"
  std::string home_base;
  std::size_t home_point = 0;
  Schedule schedule = Schedule::H24;
  double on_minute = 0.0;
  double off_minute = kMinutesPerDay;
  VehicleClass vehicle_class = VehicleClass::BLS;

  bool operator==(const Ambulance&) const = default;
};

/// Whether a unit with this schedule is on shift at absolute time `minute`.
bool is_on_shift(const Ambulance& amb, double minute) noexcept;

struct SimulationSettings {
  double horizon_minutes = 547200.0;  // 380 days
  double warmup_minutes = 21600.0;    // 15 days
  std::size_t replications = 30;
  std::uint64_t base_seed = 42;

  bool operator==(const SimulationSettings&) const = default;
};

/// Row-stochastic P(on-scene tag | triage tag), indexed by tag value.
using TransitionMatrix = std::array<std::array<double, 4>, 4>;

TransitionMatrix identity_transition() noexcept;

/// Everything a replication needs. Immutable after loading; share freely
/// between threads.
struct SimulationInstance {
  std::string name;
  NetworkModel network;
  TravelTimeModel travel;
  DemandModel demand;
  ServiceTimeCatalog service_times;
  std::vector<EDFacility> eds;
  TransitionMatrix severity_transition = identity_transition();
  std::array<OutcomeProbabilities, 4> outcome_model{};
  SanitizationModel sanitization;
  std::vector<FleetScenario> scenarios;
  FleetScenario scenario;  ///< the active one
  std::vector<Ambulance> fleet;
  SimulationSettings settings;

  /// Referral groups that appear on any ED, sorted.
  std::vector<std::string> referral_groups() const;
  const FleetScenario& find_scenario(std::string_view name) const;
  /// Makes `name` the active scenario and rebuilds the fleet.
  void activate(std::string_view name);
  /// Runs every static check; throws the corresponding error type.
  void validate() const;

  bool operator==(const SimulationInstance& other) const;
};

/// Builds the fleet of `scenario`. Throws CrossRefError for unknown bases and
/// InvariantViolation for an empty fleet.
std::vector<Ambulance> build_fleet(const FleetScenario& scenario, const NetworkModel& network);

/// Loads the JSON root document and the CSV files it references. `scenario`
/// selects the active scenario (default: the document's default_scenario).
SimulationInstance load_instance(const std::filesystem::path& config_path,
                                 std::optional<std::string> scenario = std::nullopt);

/// Writes the instance as instance.json plus CSV files into `dir`.
/// Loading the result yields an instance equal to `instance`.
std::filesystem::path save_instance(const SimulationInstance& instance,
                                    const std::filesystem::path& dir);

}  // namespace emsim
