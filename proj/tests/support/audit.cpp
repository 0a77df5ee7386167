#include "audit.hpp"

#include "emsim/instance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <tuple>

namespace emsim::testing {
namespace {

enum class Unit { Idle, Busy, Freed, Sanitizing };

struct UnitTrack {
  Unit status = Unit::Idle;
  std::uint64_t call = 0;
  double freed_at = -1.0;
  std::size_t position = 0;
  bool on_shift = true;
};

constexpr std::uint64_t kNone = 0;

class Auditor {
 public:
  Auditor(const SimulationInstance& inst, const ReplicationResult& result)
      : inst_(inst), res_(result), units_(inst.fleet.size()), dispatched_(result.records.size() + 1, 0) {
    for (std::size_t a = 0; a < inst.fleet.size(); ++a) {
      units_[a].position = inst.fleet[a].home_point;
      const auto& amb = inst.fleet[a];
      units_[a].on_shift = amb.schedule == Schedule::H24 || (amb.on_minute <= 0.0 && 0.0 < amb.off_minute);
    }
    best_home_.assign(inst.network.size(), std::numeric_limits<double>::infinity());
    for (std::size_t p = 0; p < inst.network.size(); ++p) {
      if (inst.network.at(p).kind != PointKind::DemandSquare) continue;
      for (const auto& amb : inst.fleet) {
        best_home_[p] = std::min(best_home_[p], inst.travel.nominal(amb.home_point, p, TravelLeg::BaseToScene));
      }
    }
  }

  AuditReport run() {
    double last_time = 0.0;
    for (const auto& e : res_.events) {
      ++report_.events;
      expect(e.time >= last_time, "event times decrease");
      last_time = e.time;
      now_ = e.time;
      switch (e.kind) {
        case EventKind::CallArrival: on_arrival(e); break;
        case EventKind::DispatchDecision: on_dispatch(e); break;
        case EventKind::ArriveScene:
        case EventKind::SceneDone:
        case EventKind::OffloadDone: on_mission_step(e); break;
        case EventKind::ArriveBase: on_arrive_base(e); break;
        case EventKind::SanitizationDone: on_sanitization_done(e); break;
        case EventKind::ShiftStart: units_.at(*e.ambulance).on_shift = true; break;
        case EventKind::ShiftEnd: units_.at(*e.ambulance).on_shift = false; break;
        default: break;
      }
    }
    check_records();
    return std::move(report_);
  }

 private:
  void expect(bool ok, const std::string& what) {
    ++report_.checks;
    if (!ok && report_.violations.size() < 50) {
      char buf[48];
      std::snprintf(buf, sizeof buf, "t=%.6f ", now_);
      report_.violations.push_back(buf + what);
    }
  }

  const MissionRecord& rec(std::uint64_t id) const { return res_.records.at(id - 1); }

  void on_arrival(const EventLogEntry& e) {
    ++arrivals_;
    expect(e.call && *e.call == arrivals_, "call ids are not consecutive");
  }

  using Key = std::tuple<int, int, double, std::uint64_t>;
  Key key(std::uint64_t id) const {
    const auto& c = rec(id).call;
    return {-static_cast<int>(c.triage_urgency()), -static_cast<int>(c.triage_tag), c.arrival_minute, id};
  }

  double base_threshold(const EmergencyCall& c) const {
    const auto u = c.triage_urgency();
    const double reach =
        inst_.travel.alpha(TravelLeg::BaseToScene, inst_.travel.slot_index_at(now_), u) * best_home_[c.scene_point];
    return std::max(inst_.scenario.threshold_for(u), reach);
  }

  TravelLeg field_leg(std::size_t position) const {
    return inst_.network.at(position).kind == PointKind::EmergencyDept ? TravelLeg::EDToScene
                                                                       : TravelLeg::SceneToScene;
  }

  void on_dispatch(const EventLogEntry& e) {
    const std::uint64_t id = *e.call;
    if (!e.ambulance) {
      expect(waiting_.insert(key(id)).second, "call queued twice");
      return;
    }
    const std::size_t a = *e.ambulance;
    auto& u = units_.at(a);
    const auto& r = rec(id);
    expect(dispatched_[id]++ == 0, "call assigned twice");
    expect(r.ambulance == a, "record names a different unit");
    expect(r.call.ts.assigned && *r.call.ts.assigned == now_, "assignment time differs from the log");
    expect(u.status != Unit::Busy, "no-preemption: unit already on a mission");
    expect(u.on_shift, "dispatch of an off-shift unit");
    if (r.origin == DispatchOrigin::Field) {
      expect(u.status == Unit::Freed && u.freed_at == now_, "no-on-road-redispatch: field dispatch after leaving");
    } else {
      expect(u.status == Unit::Idle, "no-on-road-redispatch: base dispatch of a unit not idle at base");
    }

    const auto it = waiting_.find(key(id));
    if (it != waiting_.end()) {
      for (auto q = waiting_.begin(); q != it; ++q) {
        const auto& qc = rec(std::get<3>(*q)).call;
        bool reachable = false;
        if (r.origin == DispatchOrigin::Field) {
          const double t = inst_.travel.calibrated(u.position, qc.scene_point, field_leg(u.position), now_,
                                                   qc.triage_urgency());
          reachable = t <= inst_.scenario.threshold_for(qc.triage_urgency());
        } else {
          for (std::size_t b = 0; b < units_.size(); ++b) {
            if (units_[b].status != Unit::Idle || !units_[b].on_shift) continue;
            reachable |= inst_.travel.calibrated(inst_.fleet[b].home_point, qc.scene_point, TravelLeg::BaseToScene,
                                                 now_, qc.triage_urgency()) <= base_threshold(qc);
          }
        }
        expect(!reachable, "queue discipline: higher-priority reachable call left waiting");
      }
      waiting_.erase(it);
    }
    u.status = Unit::Busy;
    u.call = id;
  }

  void on_mission_step(const EventLogEntry& e) {
    const std::uint64_t id = *e.call;
    const std::size_t a = *e.ambulance;
    auto& u = units_.at(a);
    expect(u.status == Unit::Busy && u.call == id, "mission event for a unit not serving the call");
    const auto& r = rec(id);
    const bool ends = (e.kind == EventKind::ArriveScene && r.call.status == CallStatus::CancelledEnRoute) ||
                      (e.kind == EventKind::SceneDone && r.call.status == CallStatus::ClosedOnSite) ||
                      (e.kind == EventKind::OffloadDone && r.call.status == CallStatus::Transported);
    if (!ends) return;
    expect(r.call.ts.mission_end && *r.call.ts.mission_end == now_, "mission end differs from the log");
    u.status = Unit::Freed;
    u.call = kNone;
    u.freed_at = now_;
    u.position = r.call.status == CallStatus::Transported ? inst_.network.require(r.ed) : r.call.scene_point;
    last_call_[a] = id;
  }

  void on_arrive_base(const EventLogEntry& e) {
    const std::size_t a = *e.ambulance;
    auto& u = units_.at(a);
    expect(u.status == Unit::Freed, "arrival at base of a unit that was not returning");
    u.position = inst_.fleet[a].home_point;
    const auto it = last_call_.find(a);
    const bool sanitize = it != last_call_.end() && rec(it->second).sanitization_start == now_;
    u.status = sanitize ? Unit::Sanitizing : Unit::Idle;
  }

  void on_sanitization_done(const EventLogEntry& e) {
    auto& u = units_.at(*e.ambulance);
    expect(u.status == Unit::Sanitizing, "sanitization end for a unit not sanitizing");
    u.status = Unit::Idle;
  }

  void check_records() {
    expect(arrivals_ == res_.records.size(), "call conservation: arrivals differ from records");
    for (const auto& r : res_.records) {
      const auto& c = r.call;
      const bool terminal = is_terminal(c.status);
      expect(terminal != r.censored, "call conservation: terminal and censored disagree");
      expect(terminal == c.ts.mission_end.has_value(), "terminal call without mission end");
      const auto& t = c.ts;
      double prev = c.arrival_minute;
      for (const auto& v : {t.triage_done, t.assigned, t.depart_base, t.arrive_scene, t.depart_scene, t.arrive_ed,
                            t.offload_start, t.offload_done, t.mission_end}) {
        if (!v) continue;
        expect(*v >= prev, "timestamp monotonicity");
        prev = *v;
      }
      if (auto rt = r.response_time()) expect(*rt >= 0.0, "negative response time");
      if (terminal) expect(dispatched_[c.call_id] == 1, "terminal call without exactly one assignment");
    }
  }

  const SimulationInstance& inst_;
  const ReplicationResult& res_;
  std::vector<UnitTrack> units_;
  std::vector<int> dispatched_;
  std::vector<double> best_home_;
  std::set<Key> waiting_;
  std::map<std::size_t, std::uint64_t> last_call_;
  std::uint64_t arrivals_ = 0;
  double now_ = 0.0;
  AuditReport report_;
};

}  // namespace

AuditReport audit_replication(const SimulationInstance& inst, const ReplicationResult& result) {
  return Auditor(inst, result).run();
}

}  // namespace emsim::testing
