#include "emsim/calibration.hpp"
#include "emsim/csv.hpp"
#include "emsim/digest.hpp"
#include "emsim/engine.hpp"
#include "emsim/error.hpp"
#include "emsim/ingest.hpp"
#include "emsim/results_io.hpp"
#include "emsim/synth.hpp"
#include "tiny.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

using namespace emsim;
using emsim::testing::make_tiny;
using emsim::testing::slurp;
using emsim::testing::TempDir;
using emsim::testing::TinySpec;

namespace {

std::map<std::string, std::string> tree_contents(const std::filesystem::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[std::filesystem::relative(e.path(), root).string()] = slurp(e.path());
  }
  return out;
}

}  // namespace

TEST(Csv, FormatDoubleRoundTrips) {
  for (double v : {0.0, 1.0, -2.5, 0.1, 1.0 / 3.0, 547200.0, 1e-300, 123456.789012345}) {
    const auto text = format_double(v);
    const auto back = parse_double(text);
    ASSERT_TRUE(back.has_value()) << text;
    EXPECT_EQ(*back, v) << text;
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(parse_double("inf"), std::numeric_limits<double>::infinity());
}

TEST(Csv, ParseDoubleRejectsJunk) {
  EXPECT_FALSE(parse_double("").has_value());
  EXPECT_FALSE(parse_double("1.5x").has_value());
  EXPECT_FALSE(parse_double("abc").has_value());
}

TEST(Csv, QuotingRoundTrips) {
  const auto t = parse_csv("a,b\n\"x,y\",\"say \"\"hi\"\"\"\r\n3,\n");
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t.text(0, 0), "x,y");
  EXPECT_EQ(t.text(0, 1), "say \"hi\"");
  EXPECT_EQ(t.number(1, 0), 3.0);
  EXPECT_FALSE(t.optional_number(1, 1).has_value());
  EXPECT_EQ(csv_escape("plain"), "plain");
  EXPECT_EQ(csv_escape("x,y"), "\"x,y\"");
  EXPECT_THROW(t.require_column("c"), SchemaViolation);
  EXPECT_THROW(read_csv("/nonexistent/file.csv"), MissingFile);
}

TEST(Digest, KnownVectors) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(git_blob_sha1(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  EXPECT_EQ(git_blob_sha1("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST(Digest, IncrementalMatchesOneShot) {
  Sha256 h;
  h.update("a");
  h.update("");
  h.update("bc");
  EXPECT_EQ(h.hex_final(), sha256_hex("abc"));
}

TEST(ResultsIo, ReplicationsRoundTrip) {
  TempDir dir("io_reps");
  std::vector<ReplicationSummary> runs{{0, {{"calls_total", 120}, {"coverage_urgent_20", 43.2119}}},
                                       {1, {{"calls_total", 131}, {"coverage_urgent_20", 1.0 / 3.0}}}};
  write_replications_csv(dir / "r.csv", runs);
  const auto back = read_replications_csv(dir / "r.csv");
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back[i].replication, runs[i].replication);
    EXPECT_EQ(back[i].kpis, runs[i].kpis);
  }
}

TEST(ResultsIo, SummaryRoundTrip) {
  TempDir dir("io_summary");
  std::map<std::string, SummaryStat> stats;
  stats["calls_urgent"] = {10130.1, 10119.2, 10140.8, 28.9, 10.8, 30};
  write_summary_csv(dir / "s.csv", stats);
  const auto back = read_summary_csv(dir / "s.csv");
  ASSERT_EQ(back.size(), 1u);
  const auto& s = back.at("calls_urgent");
  EXPECT_EQ(s.avg, 10130.1);
  EXPECT_EQ(s.lb, 10119.2);
  EXPECT_EQ(s.ub, 10140.8);
  EXPECT_EQ(s.sd, 28.9);
  EXPECT_EQ(s.n, 30u);
}

TEST(ResultsIo, TargetsAndObservationsRoundTrip) {
  TempDir dir("io_targets");
  const std::map<std::string, double> targets{{"calls_urgent", 10399}, {"coverage_urgent_20", 61.25}};
  write_targets_csv(dir / "t.csv", targets);
  EXPECT_EQ(read_targets_csv(dir / "t.csv"), targets);

  const std::vector<CalibrationObservation> obs{
      {TravelLeg::BaseToScene, "weekday_peak", UrgencyClass::Urgent, 12.5, 10.75},
      {TravelLeg::SceneToED, "weekend_night", UrgencyClass::NonUrgent, 20.0, 1.0 / 3.0}};
  write_observations_csv(dir / "o.csv", obs);
  EXPECT_EQ(read_observations_csv(dir / "o.csv"), obs);
}

TEST(ResultsIo, PairedRoundTrip) {
  TempDir dir("io_paired");
  PairedComparison c{"as-is", "S5", {}};
  c.entries.push_back({UrgencyClass::Urgent, 20, {-8.12, -8.6, -7.64, 1.2, 30, Verdict::SignificantImprovement}});
  c.entries.push_back({UrgencyClass::NonUrgent, 60, {0.1, -0.2, 0.4, 0.8, 30, Verdict::NotSignificant}});
  write_paired_csv(dir / "p.csv", c);
  const auto back = read_paired_csv(dir / "p.csv");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].urgency, UrgencyClass::Urgent);
  EXPECT_EQ(back[0].threshold, 20.0);
  EXPECT_EQ(back[0].result.lo, -8.6);
  EXPECT_EQ(back[0].result.verdict, Verdict::SignificantImprovement);
  EXPECT_EQ(back[1].result.verdict, Verdict::NotSignificant);
}

TEST(ResultsIo, ManifestRoundTrip) {
  TempDir dir("io_manifest");
  write_text_file(dir / "a.txt", "hello\n");
  RunManifest m;
  m.command = "simulate";
  m.tool_version = "0.1.0";
  m.instance_name = "x";
  m.inputs = digest_inputs(dir.path(), {"a.txt"});
  m.instance_hash = combined_hash(m.inputs);
  m.scenario = "as-is";
  m.base_seed = 42;
  m.replications = 30;
  m.horizon_minutes = 547200;
  m.warmup_minutes = 21600;
  m.started_at = utc_now_iso8601();
  m.finished_at = m.started_at;
  write_manifest(dir / "manifest.json", m);
  const auto back = read_manifest(dir / "manifest.json");
  EXPECT_EQ(back.command, m.command);
  EXPECT_EQ(back.instance_hash, m.instance_hash);
  EXPECT_EQ(back.base_seed, 42u);
  EXPECT_EQ(back.replications, 30u);
  EXPECT_EQ(back.horizon_minutes, 547200.0);
  ASSERT_EQ(back.inputs.size(), 1u);
  EXPECT_EQ(back.inputs[0].path, "a.txt");
  EXPECT_EQ(back.inputs[0].sha1, "ce013625030ba8dba906f756967f9e9ca394464a");
  EXPECT_EQ(back.started_at.size(), 20u);
}

TEST(Ingest, MissionsRoundTripAndExactPhaseRecovery) {
  TinySpec spec;
  spec.zones = {{"Z1", "S1", Distribution::constant(100.0)}};
  spec.horizon = 5000;
  const auto inst = make_tiny(spec);
  const auto run = run_replication(inst, 0);
  const auto rows = missions_from_records(inst, run.records);
  ASSERT_GT(rows.size(), 40u);

  TempDir dir("io_missions");
  write_missions_csv(dir / "m.csv", rows);
  const auto back = read_missions_csv(dir / "m.csv");
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].call_id, rows[i].call_id);
    EXPECT_EQ(back[i].call_start, rows[i].call_start);
    EXPECT_EQ(back[i].arrive_scene, rows[i].arrive_scene);
    EXPECT_EQ(back[i].mission_end, rows[i].mission_end);
    EXPECT_EQ(back[i].base_id, rows[i].base_id);
    EXPECT_EQ(back[i].outcome, rows[i].outcome);
  }

  const auto samples = extract_phase_samples(back);
  const auto u = index_of(UrgencyClass::Urgent);
  auto all_equal = [&](ServicePhase p, double v) {
    const auto& s = samples[index_of(p)][u];
    ASSERT_EQ(s.size(), rows.size());
    for (double x : s) EXPECT_DOUBLE_EQ(x, v);
  };
  all_equal(ServicePhase::TelephoneTriage, spec.triage);
  all_equal(ServicePhase::AmbulanceAssignment, spec.assign);
  all_equal(ServicePhase::AmbulancePreparation, spec.prep);
  all_equal(ServicePhase::TreatmentOnSite, spec.treat);
}

TEST(Ingest, RecoversAodAndTravelFactorsFromSimulatedHistory) {
  auto inst = make_rieti_like(42);
  inst.settings.horizon_minutes = 120 * 1440.0;
  inst.settings.warmup_minutes = 0;
  const auto run = run_replication(inst, 3);
  const auto rows = missions_from_records(inst, run.records);
  const auto result = ingest(inst, rows);

  for (const auto& e : result.aod) {
    if (e.arrivals < 200) continue;
    const auto it = std::find_if(inst.eds.begin(), inst.eds.end(), [&](const EDFacility& f) { return f.point == e.ed; });
    ASSERT_NE(it, inst.eds.end());
    const double p = it->aod_probability;
    const double sigma = std::sqrt(p * (1 - p) / double(e.arrivals));
    EXPECT_NEAR(e.probability(), p, 4 * sigma + 1e-9) << e.ed;
  }

  const auto table = build_table(result.observations).table;
  std::size_t checked = 0;
  for (const auto& [key, entry] : table.entries()) {
    if (entry.n_obs < 100) continue;
    const double truth = inst.travel.calibration().alpha(key.leg, key.slot, key.urgency);
    EXPECT_NEAR(entry.alpha, truth, 0.03) << key.slot;
    ++checked;
  }
  EXPECT_GT(checked, 5u);
}

TEST(Synth, SameSeedSameFiles) {
  TempDir a("synth_a"), b("synth_b");
  write_synth(a.path(), "rieti-like", 7);
  write_synth(b.path(), "rieti-like", 7);
  const auto ta = tree_contents(a.path());
  EXPECT_GE(ta.size(), 5u);
  EXPECT_EQ(ta, tree_contents(b.path()));
  EXPECT_THROW(write_synth(a / "x", "nowhere", 7), SchemaViolation);
}

TEST(Synth, ZoneRatesFollowAnnualTable) {
  const auto inst = make_rieti_like(42);
  ASSERT_EQ(inst.demand.zones.size(), rieti::kZones.size());
  for (std::size_t z = 0; z < rieti::kZones.size(); ++z) {
    EXPECT_EQ(inst.demand.zones[z].id, rieti::kZones[z]);
    for (std::size_t p = 0; p < 4; ++p) {
      const double minutes = rieti::kSlotBoundaries[p + 1] - rieti::kSlotBoundaries[p];
      const double expected = rieti::kMeasuredDays * minutes / rieti::kAnnualCalls[z][p];
      EXPECT_NEAR(inst.demand.zones[z].interarrival[p].mean() / expected, 1.0, 1e-6);
    }
  }
}
