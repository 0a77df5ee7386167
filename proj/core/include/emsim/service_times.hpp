#pragma once

#include "emsim/distribution.hpp"
#include "emsim/types.hpp"

#include <array>
#include <optional>

namespace emsim {

/// Duration distribution per (service phase, urgency class). Offload delay
/// is per ED and lives on EDFacility.
class ServiceTimeCatalog {
 public:
  void set(ServicePhase phase, UrgencyClass urgency, Distribution dist);
  /// Throws InvariantViolation when the entry is missing.
  const Distribution& get(ServicePhase phase, UrgencyClass urgency) const;
  bool has(ServicePhase phase, UrgencyClass urgency) const noexcept;
  /// True when all seven phases are present for both urgency classes.
  bool complete() const noexcept;
  /// Throws InvariantViolation naming the first missing entry.
  void require_complete() const;

  bool operator==(const ServiceTimeCatalog&) const = default;

 private:
  std::array<std::array<std::optional<Distribution>, 2>, kPhaseCount> table_{};
};

}  // namespace emsim
