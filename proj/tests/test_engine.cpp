#include "audit.hpp"
#include "emsim/digest.hpp"
#include "emsim/engine.hpp"
#include "emsim/error.hpp"
#include "emsim/synth.hpp"
#include "tiny.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace emsim;
using namespace emsim::testing;

namespace {

std::vector<std::string> log_lines(const SimulationInstance& inst, const ReplicationResult& r) {
  std::vector<std::string> out;
  for (const auto& e : r.events) out.push_back(format_event(e, inst.fleet));
  return out;
}

ReplicationResult run(const SimulationInstance& inst) {
  RunOptions opt;
  opt.keep_event_log = true;
  opt.check_invariants = true;
  auto r = run_replication(inst, 0, opt);
  EXPECT_TRUE(r.invariants.ok()) << (r.invariants.messages.empty() ? "" : r.invariants.messages[0]);
  const auto audit = audit_replication(inst, r);
  EXPECT_TRUE(audit.ok()) << (audit.violations.empty() ? "" : audit.violations[0]);
  return r;
}

SimulationInstance rieti_month() {
  auto inst = make_rieti_like(42);
  inst.settings.horizon_minutes = 30 * 1440.0;
  inst.settings.warmup_minutes = 2 * 1440.0;
  return inst;
}

}  // namespace

TEST(HandTrace, SingleCallTreatedOnSite) {
  const auto inst = make_tiny(single_call_trace());
  const auto r = run(inst);
  ASSERT_EQ(r.records.size(), 1u);
  const auto& rec = r.records[0];
  const auto& ts = rec.call.ts;
  const double t0 = kTraceStart;
  EXPECT_EQ(rec.call.arrival_minute, t0);
  EXPECT_EQ(*ts.triage_done, t0 + 1);
  EXPECT_EQ(*ts.assigned, t0 + 2);
  EXPECT_EQ(*ts.depart_base, t0 + 4);
  EXPECT_EQ(*ts.arrive_scene, t0 + 9);
  EXPECT_EQ(*rec.response_time(), 9.0);
  EXPECT_EQ(*ts.depart_scene, t0 + 19);
  EXPECT_EQ(*ts.mission_end, t0 + 19);
  EXPECT_EQ(rec.call.status, CallStatus::ClosedOnSite);
  EXPECT_EQ(rec.origin, DispatchOrigin::Base);
  EXPECT_FALSE(rec.was_queued);

  const std::vector<std::string> golden{
      "1000.000000,0,CallArrival,1,",
      "1001.000000,1,TriageDone,1,",
      "1002.000000,2,DispatchDecision,1,B1-H24-1",
      "1009.000000,3,ArriveScene,1,B1-H24-1",
      "1019.000000,4,SceneDone,1,B1-H24-1",
      "1024.000000,5,ArriveBase,,B1-H24-1",
  };
  EXPECT_EQ(log_lines(inst, r), golden);
}

TEST(HandTrace, SecondCallWaitsForTheUnitAtBase) {
  const auto inst = make_tiny(two_call_trace(false));
  const auto r = run(inst);
  ASSERT_EQ(r.records.size(), 2u);
  const auto& first = r.records[0];
  const auto& second = r.records[1];
  const double t0 = kTraceStart;
  EXPECT_EQ(*first.call.ts.arrive_scene, t0 + 9);
  EXPECT_TRUE(second.was_queued);
  EXPECT_EQ(second.origin, DispatchOrigin::Base);
  // Available again at base at t0 + 24 and dispatched that same instant.
  EXPECT_EQ(*second.call.ts.assigned, t0 + 24);
  EXPECT_EQ(*second.call.ts.depart_base, t0 + 26);
  EXPECT_EQ(*second.call.ts.arrive_scene, t0 + 31);
  EXPECT_EQ(*second.response_time(), 31.0);

  const auto lines = log_lines(inst, r);
  const auto queued = std::find(lines.begin(), lines.end(), "1002.000000,5,DispatchDecision,2,");
  EXPECT_NE(queued, lines.end());
  const auto back = std::find(lines.begin(), lines.end(), "1024.000000,8,ArriveBase,,B1-H24-1");
  ASSERT_NE(back, lines.end());
  ASSERT_NE(back + 1, lines.end());
  EXPECT_EQ(*(back + 1), "1024.000000,9,DispatchDecision,2,B1-H24-1");
}

TEST(HandTrace, NearbyQueuedCallIsServedDirectlyFromTheScene) {
  const auto inst = make_tiny(two_call_trace(true));
  const auto r = run(inst);
  ASSERT_EQ(r.records.size(), 2u);
  const auto& second = r.records[1];
  const double t0 = kTraceStart;
  EXPECT_TRUE(second.was_queued);
  EXPECT_EQ(second.origin, DispatchOrigin::Field);
  EXPECT_EQ(*second.call.ts.assigned, t0 + 19);
  EXPECT_EQ(*second.call.ts.depart_base, t0 + 19);  // no preparation from the field
  EXPECT_EQ(*second.call.ts.arrive_scene, t0 + 23);
  EXPECT_EQ(*second.call.ts.mission_end, t0 + 33);
  EXPECT_EQ(second.home_base, "B1");
  const auto lines = log_lines(inst, r);
  EXPECT_EQ(lines.back(), "1038.000000,11,ArriveBase,,B1-H24-1");
  // The unit never went home between the two missions.
  for (const auto& l : lines) {
    if (l.find("ArriveBase") != std::string::npos) EXPECT_EQ(l.substr(0, 11), "1038.000000");
  }
}

TEST(HandTrace, TransportThroughTheEmergencyDepartment) {
  auto spec = single_call_trace();
  spec.outcome = {0.0, 0.0, 1.0};
  const auto inst = make_tiny(spec);
  const auto r = run(inst);
  const auto& rec = r.records[0];
  const auto& ts = rec.call.ts;
  const double t0 = kTraceStart;
  EXPECT_EQ(rec.call.status, CallStatus::Transported);
  EXPECT_EQ(rec.ed, "E1");
  EXPECT_EQ(*ts.depart_scene, t0 + 12);  // load 3
  EXPECT_EQ(*ts.arrive_ed, t0 + 17);
  EXPECT_EQ(*ts.offload_start, t0 + 17);
  EXPECT_EQ(*ts.offload_done, t0 + 21);  // discharge 4
  EXPECT_EQ(*ts.mission_end, t0 + 21);
  EXPECT_EQ(log_lines(inst, r).back(), "1026.000000,7,ArriveBase,,B1-H24-1");
}

TEST(HandTrace, OffloadDelayBlocksTheUnit) {
  auto spec = single_call_trace();
  spec.outcome = {0.0, 0.0, 1.0};
  spec.eds = {{"E1", {"general"}, 1.0, Distribution::constant(45.0)}};
  const auto inst = make_tiny(spec);
  const auto& ts = run(inst).records[0].call.ts;
  EXPECT_EQ(*ts.arrive_ed, kTraceStart + 17);
  EXPECT_EQ(*ts.offload_start, kTraceStart + 62);
  EXPECT_EQ(*ts.mission_end, kTraceStart + 66);
}

TEST(HandTrace, CancelledMissionEndsAtTheScheduledArrival) {
  auto spec = single_call_trace();
  // The outcome model needs an on-scene ending, so cancellation is made
  // certain only up to a negligible transport probability.
  spec.outcome = {1.0 - 1e-12, 0.0, 1e-12};
  const auto inst = make_tiny(spec);
  const auto r = run(inst);
  const auto& rec = r.records[0];
  EXPECT_EQ(rec.call.status, CallStatus::CancelledEnRoute);
  EXPECT_FALSE(rec.call.ts.arrive_scene.has_value());
  EXPECT_EQ(*rec.call.ts.mission_end, kTraceStart + 9);
  EXPECT_FALSE(rec.response_time().has_value());
}

TEST(HandTrace, SanitizationHappensAtBase) {
  auto spec = single_call_trace();
  spec.sanitization_probability = 1.0;
  const auto inst = make_tiny(spec);
  const auto r = run(inst);
  const auto& rec = r.records[0];
  EXPECT_EQ(*rec.sanitization_start, kTraceStart + 24);
  EXPECT_EQ(*rec.sanitization_end, kTraceStart + 44);
  EXPECT_EQ(log_lines(inst, r).back(), "1044.000000,6,SanitizationDone,,B1-H24-1");
}

TEST(HandTrace, HubOnlyGroupDrivesPastTheNearerSpoke) {
  auto spec = single_call_trace();
  spec.zones[0].group = "hub";
  spec.outcome = {0.0, 0.0, 1.0};
  spec.eds = {{"E1", {"general"}}, {"E2", {"general", "hub"}}};
  spec.times[{"S1", "E1", TravelLeg::SceneToED}] = 5.0;
  spec.times[{"S1", "E2", TravelLeg::SceneToED}] = 20.0;
  const auto inst = make_tiny(spec);
  const auto& rec = run(inst).records[0];
  EXPECT_EQ(rec.ed, "E2");
  EXPECT_EQ(*rec.call.ts.arrive_ed, *rec.call.ts.depart_scene + 20.0);
}

TEST(Shifts, NightCallWaitsForTheMorningShift) {
  TinySpec spec;
  spec.allocations = {{"B1", 0, 1}};
  spec.zones = {{"Z1", "S1", Distribution::constant(1260.0)}};  // Monday 21:00
  spec.horizon = 2500.0;
  const auto inst = make_tiny(spec);
  const auto r = run(inst);
  ASSERT_EQ(r.records.size(), 1u);
  const auto& rec = r.records[0];
  EXPECT_TRUE(rec.was_queued);
  EXPECT_EQ(*rec.call.ts.assigned, 1440.0 + 480.0);  // Tuesday 08:00
}

TEST(Shifts, MissionRunningPastShiftEndIsCompleted) {
  TinySpec spec;
  spec.allocations = {{"B1", 0, 1}};
  spec.treat = 43.0;
  spec.zones = {{"Z1", "S1", Distribution::constant(1188.0)},   // dispatched 19:50
                {"Z2", "S2", Distribution::constant(1250.0)}};  // after the shift
  spec.horizon = 2300.0;
  const auto inst = make_tiny(spec);
  const auto r = run(inst);
  ASSERT_EQ(r.records.size(), 2u);
  const auto& first = r.records[0];
  EXPECT_EQ(*first.call.ts.assigned, 1190.0);
  EXPECT_EQ(*first.call.ts.mission_end, 1240.0);  // 20:40
  EXPECT_EQ(first.call.status, CallStatus::ClosedOnSite);
  EXPECT_EQ(*r.records[1].call.ts.assigned, 1920.0);
}

TEST(Shifts, H24UnitsHaveNoShiftEvents) {
  const auto inst = make_tiny(single_call_trace());
  for (const auto& l : log_lines(inst, run(inst))) EXPECT_EQ(l.find("Shift"), std::string::npos);
}

TEST(Engine, ZeroRateDemandLogsOnlyShiftEvents) {
  TinySpec spec;
  spec.allocations = {{"B1", 0, 1}};
  const auto inst = make_tiny(spec);
  const auto r = run(inst);
  EXPECT_TRUE(r.records.empty());
  const std::vector<std::string> golden{"480.000000,0,ShiftStart,,B1-H12-1", "1200.000000,1,ShiftEnd,,B1-H12-1"};
  EXPECT_EQ(log_lines(inst, r), golden);
}

TEST(DispatchRule, FastestUnitWins) {
  const std::vector<DispatchCandidate> c{{0, 8.0}, {1, 5.0}};
  EXPECT_EQ(choose_ambulance(c, 30.0)->ambulance, 1u);
}

TEST(DispatchRule, AllBeyondThresholdQueues) {
  const std::vector<DispatchCandidate> c{{0, 31.0}, {1, 45.0}};
  EXPECT_FALSE(choose_ambulance(c, 30.0).has_value());
  EXPECT_FALSE(choose_ambulance({}, 30.0).has_value());
}

TEST(DispatchRule, TiesGoToTheLowerId) {
  const std::vector<DispatchCandidate> c{{3, 6.0}, {1, 6.0}, {2, 7.0}};
  EXPECT_EQ(choose_ambulance(c, 30.0)->ambulance, 1u);
}

TEST(SceneResolution, IdentityMatrixKeepsTheTag) {
  std::array<OutcomeProbabilities, 4> outcomes;
  outcomes.fill({0.0, 0.5, 0.5});
  RngStream s(1, 0, "scene");
  for (auto t : kAllTags) {
    for (int i = 0; i < 100; ++i) EXPECT_EQ(on_scene_resolution(t, identity_transition(), outcomes, s).onscene_tag, t);
  }
}

TEST(SceneResolution, UpgradeFrequency) {
  auto m = identity_transition();
  m[index_of(SeverityTag::Yellow)] = {0.0, 0.0, 0.8, 0.2};  // White, Green, Yellow, Red
  std::array<OutcomeProbabilities, 4> outcomes;
  outcomes.fill({0.0, 0.0, 1.0});
  RngStream s(2, 0, "scene");
  const int n = 50000;
  int red = 0;
  for (int i = 0; i < n; ++i) red += on_scene_resolution(SeverityTag::Yellow, m, outcomes, s).onscene_tag == SeverityTag::Red;
  EXPECT_NEAR(static_cast<double>(red) / n, 0.2, 0.005);
}

TEST(SceneResolution, CertainTransport) {
  std::array<OutcomeProbabilities, 4> outcomes;
  outcomes.fill({0.0, 1.0, 0.0});
  outcomes[index_of(SeverityTag::Red)] = {0.0, 0.0, 1.0};
  RngStream s(3, 0, "scene");
  for (int i = 0; i < 1000; ++i) {
    EXPECT_EQ(on_scene_resolution(SeverityTag::Red, identity_transition(), outcomes, s).outcome,
              SceneOutcome::Transport);
  }
}

TEST(SelectEd, NearestOfTheGroup) {
  TinySpec spec;
  spec.eds = {{"E1", {"general"}}, {"E2", {"general"}}, {"E3", {"pediatric"}}};
  spec.times[{"S1", "E1", TravelLeg::SceneToED}] = 12.0;
  spec.times[{"S1", "E2", TravelLeg::SceneToED}] = 9.0;
  spec.times[{"S1", "E3", TravelLeg::SceneToED}] = 1.0;
  const auto inst = make_tiny(spec);
  const auto s1 = inst.network.require("S1");
  EXPECT_EQ(inst.eds[select_ed("general", s1, inst.eds, inst.travel, 0.0, UrgencyClass::Urgent)].point, "E2");
  EXPECT_EQ(inst.eds[select_ed("pediatric", s1, inst.eds, inst.travel, 0.0, UrgencyClass::Urgent)].point, "E3");
  EXPECT_THROW(select_ed("burns", s1, inst.eds, inst.travel, 0.0, UrgencyClass::Urgent), NoEligibleED);
}

TEST(Offload, ProbabilityZeroNeverDelays) {
  ServiceTimeCatalog cat = make_tiny(TinySpec{}).service_times;
  EDFacility ed;
  ed.aod_probability = 0.0;
  ed.aod_delay = Distribution::constant(45.0);
  RngStream s(4, 0, "aod");
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(offload(ed, cat, UrgencyClass::Urgent, s).aod, 0.0);
}

TEST(Offload, ProbabilityOneAlwaysDelays) {
  ServiceTimeCatalog cat = make_tiny(TinySpec{}).service_times;
  EDFacility ed;
  ed.aod_probability = 1.0;
  ed.aod_delay = Distribution::constant(45.0);
  RngStream s(5, 0, "aod");
  for (int i = 0; i < 1000; ++i) {
    const auto t = offload(ed, cat, UrgencyClass::Urgent, s);
    EXPECT_EQ(t.aod, 45.0);
    EXPECT_EQ(t.total(), 49.0);
  }
}

TEST(Offload, BlockFrequencyFollowsTheProbability) {
  ServiceTimeCatalog cat = make_tiny(TinySpec{}).service_times;
  EDFacility ed;
  ed.aod_probability = 0.3;
  ed.aod_delay = Distribution::triangular(5, 15, 60);
  RngStream s(6, 0, "aod");
  const int n = 20000;
  int blocked = 0;
  for (int i = 0; i < n; ++i) blocked += offload(ed, cat, UrgencyClass::Urgent, s).aod > 0.0;
  EXPECT_NEAR(static_cast<double>(blocked) / n, 0.3, 0.01);
}

TEST(Engine, ReplicationsAreReproducible) {
  const auto inst = rieti_month();
  const auto a = run_replication(inst, 0);
  const auto b = run_replication(inst, 0);
  const auto c = run_replication(inst, 1);
  EXPECT_EQ(a.event_digest, b.event_digest);
  EXPECT_EQ(a.event_count, b.event_count);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) ASSERT_TRUE(a.records[i].call == b.records[i].call);
  EXPECT_NE(a.event_digest, c.event_digest);
  EXPECT_EQ(a.event_digest.size(), 64u);
}

TEST(Engine, KeptLogMatchesTheDigest) {
  const auto inst = rieti_month();
  RunOptions opt;
  opt.keep_event_log = true;
  const auto r = run_replication(inst, 0, opt);
  EXPECT_EQ(r.events.size(), r.event_count);
  Sha256 h;
  for (const auto& e : r.events) h.update(format_event(e, inst.fleet) + "\n");
  EXPECT_EQ(h.hex_final(), r.event_digest);
  EXPECT_EQ(run_replication(inst, 0).event_digest, r.event_digest);
}

TEST(Engine, SyntheticMonthPassesEveryStructuralCheck) {
  // Four times the usual demand, so that queueing and field redispatch occur.
  auto inst = rieti_month();
  for (auto& z : inst.demand.zones) {
    for (auto& d : z.interarrival) d = Distribution::exponential(d.mean() / 4.0);
  }
  RunOptions opt;
  opt.keep_event_log = true;
  opt.check_invariants = true;
  for (std::size_t rep = 0; rep < 2; ++rep) {
    const auto r = run_replication(inst, rep, opt);
    EXPECT_TRUE(r.invariants.ok());
    EXPECT_GT(r.invariants.checks, 10000u);
    const auto audit = audit_replication(inst, r);
    EXPECT_TRUE(audit.ok()) << (audit.violations.empty() ? "" : audit.violations[0]);
    EXPECT_EQ(audit.events, r.event_count);
    std::size_t queued = 0, field = 0;
    for (const auto& rec : r.records) {
      queued += rec.was_queued;
      field += rec.origin == DispatchOrigin::Field;
    }
    EXPECT_GT(queued, 0u);
    EXPECT_GT(field, 0u);
  }
}

TEST(Engine, AuditorCatchesTampering) {
  const auto inst = make_tiny(two_call_trace(false));
  RunOptions opt;
  opt.keep_event_log = true;
  auto r = run_replication(inst, 0, opt);
  ASSERT_TRUE(audit_replication(inst, r).ok());

  auto early = r;  // second call dispatched while the unit is still returning
  for (auto& e : early.events) {
    if (e.kind == EventKind::DispatchDecision && e.call == 2u && e.ambulance) e.time = kTraceStart + 20;
  }
  std::stable_sort(early.events.begin(), early.events.end(),
                   [](const EventLogEntry& a, const EventLogEntry& b) { return a.time < b.time; });
  early.records[1].call.ts.assigned = kTraceStart + 20;
  EXPECT_FALSE(audit_replication(inst, early).ok());

  auto swapped = r;  // timestamps out of order
  swapped.records[0].call.ts.depart_base = kTraceStart + 50;
  EXPECT_FALSE(audit_replication(inst, swapped).ok());

  auto lost = r;  // a closed call flagged as still open
  lost.records[1].censored = true;
  EXPECT_FALSE(audit_replication(inst, lost).ok());
}
