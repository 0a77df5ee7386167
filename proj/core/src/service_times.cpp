#include "emsim/service_times.hpp"

#include "emsim/error.hpp"

namespace emsim {

void ServiceTimeCatalog::set(ServicePhase phase, UrgencyClass urgency, Distribution dist) {
  table_[index_of(phase)][index_of(urgency)] = std::move(dist);
}

const Distribution& ServiceTimeCatalog::get(ServicePhase phase, UrgencyClass urgency) const {
  const auto& slot = table_[index_of(phase)][index_of(urgency)];
  if (!slot) {
    throw InvariantViolation("service time missing for " + std::string(to_string(phase)) + "/" +
                             std::string(to_string(urgency)));
  }
  return *slot;
}

bool ServiceTimeCatalog::has(ServicePhase phase, UrgencyClass urgency) const noexcept {
  return table_[index_of(phase)][index_of(urgency)].has_value();
}

bool ServiceTimeCatalog::complete() const noexcept {
  for (auto phase : kAllPhases) {
    for (auto u : kAllUrgencies) {
      if (!has(phase, u)) return false;
    }
  }
  return true;
}

void ServiceTimeCatalog::require_complete() const {
  for (auto phase : kAllPhases) {
    for (auto u : kAllUrgencies) (void)get(phase, u);
  }
}

}  // namespace emsim
