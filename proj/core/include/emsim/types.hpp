#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace emsim {

enum class PointKind : std::uint8_t { Base, DemandSquare, EmergencyDept };

/// A located point of the road network. Coordinates are planar meters and are
/// used only for grid construction and reporting; travel times never derive
/// from them.
struct GeoPoint {
  std::string id;
  PointKind kind = PointKind::Base;
  double x = 0.0;
  double y = 0.0;
  std::string label;

  bool operator==(const GeoPoint&) const = default;
};

/// Triage colour code. Numeric order matches clinical severity, so
/// Red > Yellow > Green > White compares as expected.
enum class SeverityTag : std::uint8_t { White = 0, Green = 1, Yellow = 2, Red = 3 };

inline constexpr std::array<SeverityTag, 4> kAllTags{SeverityTag::Red, SeverityTag::Yellow,
                                                     SeverityTag::Green, SeverityTag::White};

enum class UrgencyClass : std::uint8_t { NonUrgent = 0, Urgent = 1 };

inline constexpr std::array<UrgencyClass, 2> kAllUrgencies{UrgencyClass::Urgent,
                                                           UrgencyClass::NonUrgent};

constexpr UrgencyClass urgency_of(SeverityTag tag) noexcept {
  return tag >= SeverityTag::Yellow ? UrgencyClass::Urgent : UrgencyClass::NonUrgent;
}

enum class VehicleClass : std::uint8_t { BLS, ALS };

enum class AmbulanceState : std::uint8_t {
  IdleAtBase,
  Dispatched,
  OnScene,
  ToED,
  AtED,
  Returning,
  Sanitizing,
  OffShift,
};

enum class TravelLeg : std::uint8_t { BaseToScene, SceneToED, SceneToScene, EDToScene, ReturnToBase };

inline constexpr std::size_t kLegCount = 5;
inline constexpr std::array<TravelLeg, kLegCount> kAllLegs{
    TravelLeg::BaseToScene, TravelLeg::SceneToED, TravelLeg::SceneToScene, TravelLeg::EDToScene,
    TravelLeg::ReturnToBase};

enum class ServicePhase : std::uint8_t {
  TelephoneTriage,
  AmbulanceAssignment,
  AmbulancePreparation,
  TreatmentOnSite,
  PatientLoad,
  PatientDischarge,
  Sanitization,
};

inline constexpr std::size_t kPhaseCount = 7;
inline constexpr std::array<ServicePhase, kPhaseCount> kAllPhases{
    ServicePhase::TelephoneTriage,  ServicePhase::AmbulanceAssignment,
    ServicePhase::AmbulancePreparation, ServicePhase::TreatmentOnSite,
    ServicePhase::PatientLoad,      ServicePhase::PatientDischarge,
    ServicePhase::Sanitization};

// String conversions. The parse_* functions throw SchemaViolation on unknown
// names; `field` names the offending input for the error message.
std::string_view to_string(PointKind kind) noexcept;
std::string_view to_string(SeverityTag tag) noexcept;
std::string_view to_string(UrgencyClass urgency) noexcept;
std::string_view to_string(VehicleClass cls) noexcept;
std::string_view to_string(AmbulanceState state) noexcept;
std::string_view to_string(TravelLeg leg) noexcept;
std::string_view to_string(ServicePhase phase) noexcept;

PointKind parse_point_kind(std::string_view text, std::string_view field = "kind");
SeverityTag parse_severity_tag(std::string_view text, std::string_view field = "tag");
UrgencyClass parse_urgency(std::string_view text, std::string_view field = "urgency");
TravelLeg parse_leg(std::string_view text, std::string_view field = "leg");
ServicePhase parse_phase(std::string_view text, std::string_view field = "phase");

constexpr std::size_t index_of(UrgencyClass u) noexcept { return static_cast<std::size_t>(u); }
constexpr std::size_t index_of(TravelLeg leg) noexcept { return static_cast<std::size_t>(leg); }
constexpr std::size_t index_of(ServicePhase p) noexcept { return static_cast<std::size_t>(p); }
constexpr std::size_t index_of(SeverityTag t) noexcept { return static_cast<std::size_t>(t); }

}  // namespace emsim
