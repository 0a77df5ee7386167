#include "emsim/engine.hpp"

#include "emsim/digest.hpp"
#include "emsim/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>
#include <set>

namespace emsim {

std::string_view to_string(EventKind kind) noexcept {
  switch (kind) {
    case EventKind::CallArrival: return "CallArrival";
    case EventKind::TriageDone: return "TriageDone";
    case EventKind::DispatchDecision: return "DispatchDecision";
    case EventKind::ArriveScene: return "ArriveScene";
    case EventKind::SceneDone: return "SceneDone";
    case EventKind::ArriveED: return "ArriveED";
    case EventKind::OffloadDone: return "OffloadDone";
    case EventKind::ArriveBase: return "ArriveBase";
    case EventKind::SanitizationDone: return "SanitizationDone";
    case EventKind::ShiftStart: return "ShiftStart";
    case EventKind::ShiftEnd: return "ShiftEnd";
  }
  return "?";
}

EventKind parse_event_kind(std::string_view text) {
  for (int k = 0; k <= static_cast<int>(EventKind::ShiftEnd); ++k) {
    if (to_string(static_cast<EventKind>(k)) == text) return static_cast<EventKind>(k);
  }
  throw SchemaViolation("kind", "unknown event kind '" + std::string(text) + "'");
}

std::string_view to_string(DispatchOrigin origin) noexcept {
  switch (origin) {
    case DispatchOrigin::None: return "";
    case DispatchOrigin::Base: return "base";
    case DispatchOrigin::Field: return "field";
  }
  return "?";
}

std::optional<double> MissionRecord::response_time() const {
  if ((call.status == CallStatus::ClosedOnSite || call.status == CallStatus::Transported) &&
      call.ts.arrive_scene) {
    return *call.ts.arrive_scene - call.arrival_minute;
  }
  return std::nullopt;
}

std::string format_event(const EventLogEntry& e, std::span<const Ambulance> fleet) {
  char buf[160];
  char call[24] = "";
  if (e.call) std::snprintf(call, sizeof call, "%llu", static_cast<unsigned long long>(*e.call));
  const char* amb = e.ambulance ? fleet[*e.ambulance].id.c_str() : "";
  std::snprintf(buf, sizeof buf, "%.6f,%llu,%s,%s,%s", e.time,
                static_cast<unsigned long long>(e.seq), to_string(e.kind).data(), call, amb);
  return buf;
}

// ---------------------------------------------------------------------------
// Decision rules
// ---------------------------------------------------------------------------

std::optional<DispatchCandidate> choose_ambulance(std::span<const DispatchCandidate> candidates,
                                                  double threshold) {
  std::optional<DispatchCandidate> best;
  for (const auto& c : candidates) {
    if (!best || c.travel_minutes < best->travel_minutes ||
        (c.travel_minutes == best->travel_minutes && c.ambulance < best->ambulance)) {
      best = c;
    }
  }
  if (!best || best->travel_minutes > threshold) return std::nullopt;
  return best;
}

std::size_t categorical_index(std::span<const double> probs, double u) {
  double total = 0.0;
  for (double p : probs) total += p;
  const double target = u * total;
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    cumulative += probs[i];
    last_positive = i;
    if (target < cumulative) return i;
  }
  return last_positive;
}

SceneResolution on_scene_resolution(SeverityTag triage, const TransitionMatrix& transition,
                                    const std::array<OutcomeProbabilities, 4>& outcomes,
                                    double u_tag, double u_outcome) {
  SceneResolution r;
  r.onscene_tag = static_cast<SeverityTag>(categorical_index(transition[index_of(triage)], u_tag));
  const auto& o = outcomes[index_of(r.onscene_tag)];
  const double on_scene = o.treat_on_site + o.transport;
  r.outcome = u_outcome * on_scene < o.treat_on_site ? SceneOutcome::TreatOnSite
                                                     : SceneOutcome::Transport;
  return r;
}

SceneResolution on_scene_resolution(SeverityTag triage, const TransitionMatrix& transition,
                                    const std::array<OutcomeProbabilities, 4>& outcomes,
                                    RngStream& stream) {
  const double u_tag = stream.uniform();
  const double u_outcome = stream.uniform();
  return on_scene_resolution(triage, transition, outcomes, u_tag, u_outcome);
}

std::size_t select_ed(std::string_view group, std::size_t scene_point,
                      std::span<const EDFacility> eds, const TravelTimeModel& travel, double now,
                      UrgencyClass urgency) {
  std::optional<std::size_t> best;
  double best_time = 0.0;
  for (std::size_t i = 0; i < eds.size(); ++i) {
    const auto& groups = eds[i].referral_groups;
    if (std::find(groups.begin(), groups.end(), group) == groups.end()) continue;
    const double t = travel.calibrated(scene_point, eds[i].point_index, TravelLeg::SceneToED, now, urgency);
    if (!best || t < best_time || (t == best_time && eds[i].point < eds[*best].point)) {
      best = i;
      best_time = t;
    }
  }
  if (!best) throw NoEligibleED(std::string(group));
  return *best;
}

OffloadTimes offload(const EDFacility& ed, const ServiceTimeCatalog& catalog, UrgencyClass urgency,
                     double u_flag, double u_delay, double u_discharge) {
  OffloadTimes t;
  if (u_flag < ed.aod_probability) t.aod = ed.aod_delay.quantile(u_delay);
  t.discharge = catalog.get(ServicePhase::PatientDischarge, urgency).quantile(u_discharge);
  return t;
}

OffloadTimes offload(const EDFacility& ed, const ServiceTimeCatalog& catalog, UrgencyClass urgency,
                     RngStream& stream) {
  const double u_flag = stream.uniform();
  const double u_delay = stream.uniform();
  const double u_discharge = stream.uniform();
  return offload(ed, catalog, urgency, u_flag, u_delay, u_discharge);
}

// ---------------------------------------------------------------------------
// Event loop
// ---------------------------------------------------------------------------

namespace {

// Per-call uniforms, drawn once at spawn in this fixed order so that a call
// sees the same random inputs whatever path it takes through the system.
enum Draw : std::size_t {
  kTriage,
  kAssign,
  kPrep,
  kCancel,
  kTag,
  kOutcome,
  kNoise,
  kTreat,
  kLoad,
  kAodFlag,
  kAodDelay,
  kDischarge,
  kSanFlag,
  kSanDuration,
  kDrawCount
};

constexpr std::uint64_t kNoCall = std::numeric_limits<std::uint64_t>::max();
constexpr std::size_t kNoUnit = std::numeric_limits<std::size_t>::max();
constexpr std::size_t kMaxMessages = 20;

struct Event {
  double time;
  std::uint64_t seq;
  EventKind kind;
  std::uint64_t call;
  std::size_t unit;
  std::size_t zone;
};

struct Later {
  bool operator()(const Event& a, const Event& b) const noexcept {
    return a.time > b.time || (a.time == b.time && a.seq > b.seq);
  }
};

struct CallState {
  std::array<double, kDrawCount> u{};
  DispatchOrigin origin = DispatchOrigin::None;
  std::size_t unit = kNoUnit;
  std::size_t ed = kNoUnit;
  bool cancel = false;
  bool queued = false;
  SceneOutcome outcome = SceneOutcome::Transport;
  std::optional<double> sanitization_start;
  std::optional<double> sanitization_end;
};

struct Unit {
  AmbulanceState state = AmbulanceState::IdleAtBase;
  std::uint64_t call = kNoCall;
  std::size_t position = 0;
  bool sanitize_pending = false;
  UrgencyClass sanitize_urgency = UrgencyClass::Urgent;
  double sanitize_u = 0.0;
  std::uint64_t sanitize_call = kNoCall;
};

struct QueueKey {
  std::uint8_t urgency;
  std::uint8_t tag;
  double arrival;
  std::uint64_t call;

  bool operator<(const QueueKey& o) const noexcept {
    if (urgency != o.urgency) return urgency > o.urgency;
    if (tag != o.tag) return tag > o.tag;
    if (arrival != o.arrival) return arrival < o.arrival;
    return call < o.call;
  }
};

class Simulation {
 public:
  Simulation(const SimulationInstance& inst, std::size_t rep, const RunOptions& opt)
      : inst_(inst), rep_(rep), opt_(opt), horizon_(inst.settings.horizon_minutes) {
    result_.replication = rep;
    const auto& fleet = inst_.fleet;
    units_.resize(fleet.size());
    for (std::size_t a = 0; a < fleet.size(); ++a) {
      units_[a].position = fleet[a].home_point;
      units_[a].state = is_on_shift(fleet[a], 0.0) ? AmbulanceState::IdleAtBase : AmbulanceState::OffShift;
    }
    // Best possible base-to-scene nominal time per point over the fleet's bases.
    best_home_.assign(inst_.network.size(), std::numeric_limits<double>::infinity());
    for (std::size_t p = 0; p < inst_.network.size(); ++p) {
      if (inst_.network.at(p).kind != PointKind::DemandSquare) continue;
      for (const auto& amb : fleet) {
        best_home_[p] = std::min(best_home_[p], inst_.travel.nominal(amb.home_point, p, TravelLeg::BaseToScene));
      }
    }
    zone_streams_.reserve(inst_.demand.zones.size());
    for (const auto& z : inst_.demand.zones) zone_streams_.emplace_back(inst_.settings.base_seed, rep, z.id);
  }

  ReplicationResult run() {
    for (std::size_t a = 0; a < inst_.fleet.size(); ++a) {
      const auto& amb = inst_.fleet[a];
      if (amb.schedule != Schedule::H12) continue;
      schedule(amb.on_minute, EventKind::ShiftStart, kNoCall, a);
      schedule(amb.off_minute, EventKind::ShiftEnd, kNoCall, a);
    }
    for (std::size_t z = 0; z < inst_.demand.zones.size(); ++z) schedule_next_arrival(z, 0.0);

    while (!calendar_.empty()) {
      const Event e = calendar_.top();
      calendar_.pop();
      now_ = e.time;
      // Arrivals and dispatch decisions log themselves once their ids are known.
      if (e.kind != EventKind::DispatchDecision && e.kind != EventKind::CallArrival) {
        log(e.seq, e.kind, e.call, e.unit);
      }
      switch (e.kind) {
        case EventKind::CallArrival: on_arrival(e); break;
        case EventKind::TriageDone: on_triage_done(e.call); break;
        case EventKind::DispatchDecision: on_dispatch_decision(e); break;
        case EventKind::ArriveScene: on_arrive_scene(e.call); break;
        case EventKind::SceneDone: on_scene_done(e.call); break;
        case EventKind::ArriveED: on_arrive_ed(e.call); break;
        case EventKind::OffloadDone: on_offload_done(e.call); break;
        case EventKind::ArriveBase: on_arrive_base(e.unit); break;
        case EventKind::SanitizationDone: on_sanitization_done(e.unit); break;
        case EventKind::ShiftStart: on_shift_start(e.unit); break;
        case EventKind::ShiftEnd: on_shift_end(e.unit); break;
      }
    }
    finish();
    return std::move(result_);
  }

 private:
  // -- bookkeeping -----------------------------------------------------------

  void schedule(double t, EventKind kind, std::uint64_t call, std::size_t unit, std::size_t zone = 0) {
    if (!(t < horizon_)) return;  // beyond the horizon: discarded
    calendar_.push(Event{t, seq_++, kind, call, unit, zone});
  }

  void log(std::uint64_t seq, EventKind kind, std::uint64_t call, std::size_t unit) {
    EventLogEntry entry{now_, seq, kind, std::nullopt, std::nullopt};
    if (call != kNoCall) entry.call = call;
    if (unit != kNoUnit) entry.ambulance = unit;
    std::string line = format_event(entry, inst_.fleet);
    line.push_back('\n');
    digest_.update(line);
    ++result_.event_count;
    if (opt_.keep_event_log) result_.events.push_back(entry);
  }

  void violation(const std::string& what) {
    ++result_.invariants.violations;
    if (result_.invariants.messages.size() < kMaxMessages) {
      char buf[48];
      std::snprintf(buf, sizeof buf, "t=%.6f: ", now_);
      result_.invariants.messages.push_back(buf + what);
    }
  }

  void check(bool ok, const char* what) {
    ++result_.invariants.checks;
    if (!ok) violation(what);
  }

  EmergencyCall& call(std::uint64_t id) { return calls_[id - 1]; }
  CallState& state(std::uint64_t id) { return states_[id - 1]; }

  double duration(ServicePhase phase, UrgencyClass urgency, double u) const {
    return inst_.service_times.get(phase, urgency).quantile(u);
  }

  QueueKey key_of(const EmergencyCall& c) const {
    return QueueKey{static_cast<std::uint8_t>(c.triage_urgency()),
                    static_cast<std::uint8_t>(c.triage_tag), c.arrival_minute, c.call_id};
  }

  /// Threshold for dispatch from base, raised to the best achievable time
  /// so that a call beyond every base is still served by its nearest one.
  double base_threshold(const EmergencyCall& c) const {
    const auto urgency = c.triage_urgency();
    const double reachable =
        inst_.travel.alpha(TravelLeg::BaseToScene, inst_.travel.slot_index_at(now_), urgency) *
        best_home_[c.scene_point];
    return std::max(inst_.scenario.threshold_for(urgency), reachable);
  }

  std::optional<DispatchCandidate> pick_from_base(const EmergencyCall& c) {
    candidates_.clear();
    for (std::size_t a = 0; a < units_.size(); ++a) {
      if (units_[a].state != AmbulanceState::IdleAtBase) continue;
      candidates_.push_back({a, inst_.travel.calibrated(inst_.fleet[a].home_point, c.scene_point,
                                                        TravelLeg::BaseToScene, now_, c.triage_urgency())});
    }
    return choose_ambulance(candidates_, base_threshold(c));
  }

  TravelLeg field_leg(std::size_t position) const {
    return inst_.network.at(position).kind == PointKind::EmergencyDept ? TravelLeg::EDToScene
                                                                       : TravelLeg::SceneToScene;
  }

  // -- demand ----------------------------------------------------------------

  void schedule_next_arrival(std::size_t z, double from) {
    const double t = next_arrival(inst_.demand.zones[z], from, inst_.demand.scheme, inst_.demand.policy,
                                  zone_streams_[z].arrivals);
    if (std::isfinite(t)) schedule(t, EventKind::CallArrival, kNoCall, kNoUnit, z);
  }

  void on_arrival(const Event& e) {
    const std::size_t z = e.zone;
    const std::uint64_t id = calls_.size() + 1;
    log(e.seq, EventKind::CallArrival, id, kNoUnit);
    calls_.push_back(spawn_call(inst_.demand, z, id, now_, zone_streams_[z]));
    states_.emplace_back();
    RngStream draws(inst_.settings.base_seed, rep_, "call/" + std::to_string(id));
    for (auto& u : states_.back().u) u = draws.uniform();


    auto& c = call(id);
    schedule(now_ + duration(ServicePhase::TelephoneTriage, c.triage_urgency(), state(id).u[kTriage]),
             EventKind::TriageDone, id, kNoUnit);
    schedule_next_arrival(z, now_);
  }

  void on_triage_done(std::uint64_t id) {
    auto& c = call(id);
    c.ts.triage_done = now_;
    schedule(now_ + duration(ServicePhase::AmbulanceAssignment, c.triage_urgency(), state(id).u[kAssign]),
             EventKind::DispatchDecision, id, kNoUnit);
  }

  // -- dispatch --------------------------------------------------------------

  void on_dispatch_decision(const Event& e) {
    auto& c = call(e.call);
    if (auto pick = pick_from_base(c)) {
      log(e.seq, EventKind::DispatchDecision, e.call, pick->ambulance);
      assign(e.call, pick->ambulance, DispatchOrigin::Base);
    } else {
      log(e.seq, EventKind::DispatchDecision, e.call, kNoUnit);
      state(e.call).queued = true;
      queue_.insert(key_of(c));
    }
  }

  void assign(std::uint64_t id, std::size_t a, DispatchOrigin origin) {
    auto& c = call(id);
    auto& s = state(id);
    auto& unit = units_[a];
    const auto& amb = inst_.fleet[a];
    if (opt_.check_invariants) {
      check(unit.call == kNoCall, "no-preemption: unit already serving a call");
      check(origin == DispatchOrigin::Base ? unit.state == AmbulanceState::IdleAtBase
                                           : in_post_mission_ == a,
            "no-on-road-redispatch: unit not dispatchable");
      check(is_on_shift(amb, now_), "dispatch of an off-shift unit");
      check(!c.ts.assigned.has_value(), "call assigned twice");
    }
    c.ts.assigned = now_;
    c.status = CallStatus::EnRoute;
    s.origin = origin;
    s.unit = a;
    s.cancel = s.u[kCancel] < inst_.outcome_model[index_of(c.triage_tag)].cancel_en_route;
    unit.call = id;
    unit.state = AmbulanceState::Dispatched;

    const double depart =
        origin == DispatchOrigin::Base
            ? now_ + duration(ServicePhase::AmbulancePreparation, c.triage_urgency(), s.u[kPrep])
            : now_;
    const TravelLeg leg = origin == DispatchOrigin::Base ? TravelLeg::BaseToScene : field_leg(unit.position);
    const std::size_t from = origin == DispatchOrigin::Base ? amb.home_point : unit.position;
    c.ts.depart_base = depart;
    const double t = inst_.travel.travel_time_u(from, c.scene_point, leg, depart, c.triage_urgency(), s.u[kNoise]);
    schedule(depart + t, EventKind::ArriveScene, id, a);
  }

  /// Tries every queued call in priority order against the idle units.
  void rescan_queue() {
    for (auto it = queue_.begin(); it != queue_.end();) {
      const bool any_idle = std::any_of(units_.begin(), units_.end(), [](const Unit& u) {
        return u.state == AmbulanceState::IdleAtBase;
      });
      if (!any_idle) return;
      const auto& c = call(it->call);
      auto pick = pick_from_base(c);
      if (!pick) {
        ++it;
        continue;
      }
      if (opt_.check_invariants) check_queue_discipline_base(it);
      const std::uint64_t id = it->call;
      it = queue_.erase(it);
      log(seq_++, EventKind::DispatchDecision, id, pick->ambulance);
      assign(id, pick->ambulance, DispatchOrigin::Base);
    }
  }

  void check_queue_discipline_base(std::set<QueueKey>::const_iterator chosen) {
    for (auto it = queue_.begin(); it != chosen; ++it) {
      const auto& q = call(it->call);
      const double thr = base_threshold(q);
      bool reachable = false;
      for (std::size_t a = 0; a < units_.size(); ++a) {
        if (units_[a].state != AmbulanceState::IdleAtBase) continue;
        reachable |= inst_.travel.calibrated(inst_.fleet[a].home_point, q.scene_point, TravelLeg::BaseToScene,
                                             now_, q.triage_urgency()) <= thr;
      }
      check(!reachable, "queue discipline: a higher-priority reachable call was skipped");
    }
  }

  // -- mission ---------------------------------------------------------------

  void on_arrive_scene(std::uint64_t id) {
    auto& c = call(id);
    auto& s = state(id);
    auto& unit = units_[s.unit];
    unit.position = c.scene_point;
    if (s.cancel) {
      c.status = CallStatus::CancelledEnRoute;
      c.ts.mission_end = now_;
      post_mission(s.unit, id);
      return;
    }
    c.ts.arrive_scene = now_;
    unit.state = AmbulanceState::OnScene;
    const auto r = on_scene_resolution(c.triage_tag, inst_.severity_transition, inst_.outcome_model,
                                       s.u[kTag], s.u[kOutcome]);
    c.onscene_tag = r.onscene_tag;
    s.outcome = r.outcome;
    const double d = r.outcome == SceneOutcome::TreatOnSite
                         ? duration(ServicePhase::TreatmentOnSite, c.urgency(), s.u[kTreat])
                         : duration(ServicePhase::PatientLoad, c.urgency(), s.u[kLoad]);
    schedule(now_ + d, EventKind::SceneDone, id, s.unit);
  }

  void on_scene_done(std::uint64_t id) {
    auto& c = call(id);
    auto& s = state(id);
    c.ts.depart_scene = now_;
    if (s.outcome == SceneOutcome::TreatOnSite) {
      c.status = CallStatus::ClosedOnSite;
      c.ts.mission_end = now_;
      post_mission(s.unit, id);
      return;
    }
    s.ed = select_ed(c.pathology_group, c.scene_point, inst_.eds, inst_.travel, now_, c.urgency());
    units_[s.unit].state = AmbulanceState::ToED;
    const double t = inst_.travel.calibrated(c.scene_point, inst_.eds[s.ed].point_index, TravelLeg::SceneToED,
                                             now_, c.urgency());
    schedule(now_ + t, EventKind::ArriveED, id, s.unit);
  }

  void on_arrive_ed(std::uint64_t id) {
    auto& c = call(id);
    auto& s = state(id);
    const auto& ed = inst_.eds[s.ed];
    c.ts.arrive_ed = now_;
    units_[s.unit].state = AmbulanceState::AtED;
    units_[s.unit].position = ed.point_index;
    const auto t = offload(ed, inst_.service_times, c.urgency(), s.u[kAodFlag], s.u[kAodDelay], s.u[kDischarge]);
    c.ts.offload_start = now_ + t.aod;
    c.ts.offload_done = now_ + t.aod + t.discharge;
    schedule(*c.ts.offload_done, EventKind::OffloadDone, id, s.unit);
  }

  void on_offload_done(std::uint64_t id) {
    auto& c = call(id);
    c.status = CallStatus::Transported;
    c.ts.mission_end = now_;
    post_mission(state(id).unit, id);
  }

  void post_mission(std::size_t a, std::uint64_t finished) {
    auto& unit = units_[a];
    const auto& c = call(finished);
    const auto& s = state(finished);
    if (opt_.check_invariants) {
      check(c.timestamps_monotone(), "timestamp monotonicity");
      check(unit.call == finished, "unit finished a call it was not serving");
    }
    unit.call = kNoCall;

    if (s.u[kSanFlag] < inst_.sanitization.probability) {
      unit.sanitize_pending = true;
      unit.sanitize_urgency = c.urgency();
      unit.sanitize_u = s.u[kSanDuration];
      unit.sanitize_call = finished;
      return_to_base(a);
      return;
    }

    if (is_on_shift(inst_.fleet[a], now_)) {
      const TravelLeg leg = field_leg(unit.position);
      for (auto it = queue_.begin(); it != queue_.end(); ++it) {
        const auto& q = call(it->call);
        const double t = inst_.travel.calibrated(unit.position, q.scene_point, leg, now_, q.triage_urgency());
        if (t > inst_.scenario.threshold_for(q.triage_urgency())) continue;
        if (opt_.check_invariants) check_queue_discipline_field(it, unit.position, leg);
        const std::uint64_t id = it->call;
        queue_.erase(it);
        log(seq_++, EventKind::DispatchDecision, id, a);
        in_post_mission_ = a;
        assign(id, a, DispatchOrigin::Field);
        in_post_mission_ = kNoUnit;
        return;
      }
    }
    return_to_base(a);
  }

  void check_queue_discipline_field(std::set<QueueKey>::const_iterator chosen, std::size_t position,
                                    TravelLeg leg) {
    for (auto it = queue_.begin(); it != chosen; ++it) {
      const auto& q = call(it->call);
      const double t = inst_.travel.calibrated(position, q.scene_point, leg, now_, q.triage_urgency());
      check(t > inst_.scenario.threshold_for(q.triage_urgency()),
            "queue discipline: a higher-priority nearby call was skipped");
    }
  }

  void return_to_base(std::size_t a) {
    auto& unit = units_[a];
    unit.state = AmbulanceState::Returning;
    const double t = inst_.travel.calibrated(unit.position, inst_.fleet[a].home_point, TravelLeg::ReturnToBase,
                                             now_, UrgencyClass::NonUrgent);
    schedule(now_ + t, EventKind::ArriveBase, kNoCall, a);
  }

  void on_arrive_base(std::size_t a) {
    auto& unit = units_[a];
    unit.position = inst_.fleet[a].home_point;
    if (unit.sanitize_pending) {
      unit.state = AmbulanceState::Sanitizing;
      const double end = now_ + duration(ServicePhase::Sanitization, unit.sanitize_urgency, unit.sanitize_u);
      state(unit.sanitize_call).sanitization_start = now_;
      if (end < horizon_) state(unit.sanitize_call).sanitization_end = end;
      schedule(end, EventKind::SanitizationDone, kNoCall, a);
      return;
    }
    become_available(a);
  }

  void on_sanitization_done(std::size_t a) {
    units_[a].sanitize_pending = false;
    become_available(a);
  }

  void become_available(std::size_t a) {
    auto& unit = units_[a];
    if (!is_on_shift(inst_.fleet[a], now_)) {
      unit.state = AmbulanceState::OffShift;
      return;
    }
    unit.state = AmbulanceState::IdleAtBase;
    rescan_queue();
  }

  void on_shift_start(std::size_t a) {
    schedule(now_ + kMinutesPerDay, EventKind::ShiftStart, kNoCall, a);
    if (units_[a].state == AmbulanceState::OffShift) {
      units_[a].state = AmbulanceState::IdleAtBase;
      rescan_queue();
    }
  }

  void on_shift_end(std::size_t a) {
    schedule(now_ + kMinutesPerDay, EventKind::ShiftEnd, kNoCall, a);
    if (units_[a].state == AmbulanceState::IdleAtBase) units_[a].state = AmbulanceState::OffShift;
  }

  // -- wrap-up ---------------------------------------------------------------

  void finish() {
    result_.event_digest = digest_.hex_final();
    result_.records.reserve(calls_.size());
    std::uint64_t terminal = 0;
    std::uint64_t censored = 0;
    for (std::size_t i = 0; i < calls_.size(); ++i) {
      const auto& c = calls_[i];
      const auto& s = states_[i];
      MissionRecord r;
      r.call = c;
      r.origin = s.origin;
      r.was_queued = s.queued;
      r.sanitization_start = s.sanitization_start;
      r.sanitization_end = s.sanitization_end;
      r.in_warmup = c.arrival_minute < inst_.settings.warmup_minutes;
      r.censored = !is_terminal(c.status);
      if (s.unit != kNoUnit) {
        r.ambulance = s.unit;
        r.ambulance_id = inst_.fleet[s.unit].id;
        r.home_base = inst_.fleet[s.unit].home_base;
      }
      if (s.ed != kNoUnit && c.status == CallStatus::Transported) r.ed = inst_.eds[s.ed].point;
      (r.censored ? censored : terminal) += 1;
      if (opt_.check_invariants) {
        const bool in_queue = queue_.count(key_of(c)) > 0;
        check(!(in_queue && s.unit != kNoUnit), "call both queued and assigned");
        check(!in_queue || c.status == CallStatus::Queued, "queued call with a non-queued status");
      }
      result_.records.push_back(std::move(r));
    }
    if (opt_.check_invariants) {
      check(terminal + censored == calls_.size(), "call conservation");
      for (std::size_t a = 0; a < units_.size(); ++a) {
        const auto call_id = units_[a].call;
        check(call_id == kNoCall || !is_terminal(call(call_id).status), "unit holds a closed call");
      }
    }
  }

  const SimulationInstance& inst_;
  std::size_t rep_;
  RunOptions opt_;
  double horizon_;
  double now_ = 0.0;
  std::uint64_t seq_ = 0;
  std::priority_queue<Event, std::vector<Event>, Later> calendar_;
  std::vector<Unit> units_;
  std::vector<EmergencyCall> calls_;
  std::vector<CallState> states_;
  std::set<QueueKey> queue_;
  std::vector<ZoneStreams> zone_streams_;
  std::vector<double> best_home_;
  std::vector<DispatchCandidate> candidates_;
  std::size_t in_post_mission_ = kNoUnit;
  Sha256 digest_;
  ReplicationResult result_;
};

}  // namespace

ReplicationResult run_replication(const SimulationInstance& instance, std::size_t replication,
                                  const RunOptions& options) {
  return Simulation(instance, replication, options).run();
}

}  // namespace emsim
