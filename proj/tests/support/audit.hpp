#pragma once

#include "emsim/engine.hpp"

#include <string>
#include <vector>

namespace emsim::testing {

struct AuditReport {
  std::uint64_t events = 0;
  std::uint64_t checks = 0;
  std::vector<std::string> violations;
  bool ok() const noexcept { return violations.empty(); }
};

/// Re-derives the structural rules of a replication from its event log and
/// call records alone: no preemption, no redispatch while returning,
/// timestamp monotonicity, call conservation and queue discipline.
/// Requires a result produced with keep_event_log.
AuditReport audit_replication(const SimulationInstance& inst, const ReplicationResult& result);

}  // namespace emsim::testing
