#include "emsim/types.hpp"

#include "emsim/error.hpp"

#include <algorithm>

namespace emsim {

namespace {

template <typename Enum, std::size_t N>
Enum parse_from(std::string_view text, std::string_view field,
                const std::array<Enum, N>& values) {
  for (Enum v : values) {
    if (to_string(v) == text) return v;
  }
  std::string allowed;
  for (Enum v : values) {
    if (!allowed.empty()) allowed += ", ";
    allowed += to_string(v);
  }
  throw SchemaViolation(std::string(field),
                        "unknown value '" + std::string(text) + "' (expected one of " + allowed + ")");
}

}  // namespace

std::string_view to_string(PointKind kind) noexcept {
  switch (kind) {
    case PointKind::Base: return "Base";
    case PointKind::DemandSquare: return "DemandSquare";
    case PointKind::EmergencyDept: return "EmergencyDept";
  }
  return "?";
}

std::string_view to_string(SeverityTag tag) noexcept {
  switch (tag) {
    case SeverityTag::Red: return "Red";
    case SeverityTag::Yellow: return "Yellow";
    case SeverityTag::Green: return "Green";
    case SeverityTag::White: return "White";
  }
  return "?";
}

std::string_view to_string(UrgencyClass urgency) noexcept {
  return urgency == UrgencyClass::Urgent ? "Urgent" : "NonUrgent";
}

std::string_view to_string(VehicleClass cls) noexcept {
  return cls == VehicleClass::BLS ? "BLS" : "ALS";
}

std::string_view to_string(AmbulanceState state) noexcept {
  switch (state) {
    case AmbulanceState::IdleAtBase: return "IdleAtBase";
    case AmbulanceState::Dispatched: return "Dispatched";
    case AmbulanceState::OnScene: return "OnScene";
    case AmbulanceState::ToED: return "ToED";
    case AmbulanceState::AtED: return "AtED";
    case AmbulanceState::Returning: return "Returning";
    case AmbulanceState::Sanitizing: return "Sanitizing";
    case AmbulanceState::OffShift: return "OffShift";
  }
  return "?";
}

std::string_view to_string(TravelLeg leg) noexcept {
  switch (leg) {
    case TravelLeg::BaseToScene: return "BaseToScene";
    case TravelLeg::SceneToED: return "SceneToED";
    case TravelLeg::SceneToScene: return "SceneToScene";
    case TravelLeg::EDToScene: return "EDToScene";
    case TravelLeg::ReturnToBase: return "ReturnToBase";
  }
  return "?";
}

std::string_view to_string(ServicePhase phase) noexcept {
  switch (phase) {
    case ServicePhase::TelephoneTriage: return "TelephoneTriage";
    case ServicePhase::AmbulanceAssignment: return "AmbulanceAssignment";
    case ServicePhase::AmbulancePreparation: return "AmbulancePreparation";
    case ServicePhase::TreatmentOnSite: return "TreatmentOnSite";
    case ServicePhase::PatientLoad: return "PatientLoad";
    case ServicePhase::PatientDischarge: return "PatientDischarge";
    case ServicePhase::Sanitization: return "Sanitization";
  }
  return "?";
}

PointKind parse_point_kind(std::string_view text, std::string_view field) {
  static constexpr std::array kinds{PointKind::Base, PointKind::DemandSquare,
                                    PointKind::EmergencyDept};
  return parse_from(text, field, kinds);
}

SeverityTag parse_severity_tag(std::string_view text, std::string_view field) {
  return parse_from(text, field, kAllTags);
}

UrgencyClass parse_urgency(std::string_view text, std::string_view field) {
  return parse_from(text, field, kAllUrgencies);
}

TravelLeg parse_leg(std::string_view text, std::string_view field) {
  return parse_from(text, field, kAllLegs);
}

ServicePhase parse_phase(std::string_view text, std::string_view field) {
  return parse_from(text, field, kAllPhases);
}

}  // namespace emsim
