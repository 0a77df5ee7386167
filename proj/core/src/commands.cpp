#include "emsim/commands.hpp"

#include "emsim/calibration.hpp"
#include "emsim/csv.hpp"
#include "emsim/digest.hpp"
#include "emsim/engine.hpp"
#include "emsim/error.hpp"
#include "emsim/ingest.hpp"
#include "emsim/instance.hpp"
#include "emsim/results_io.hpp"
#include "emsim/synth.hpp"
#include "json_io.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <set>
#include <thread>

namespace emsim {

namespace fs = std::filesystem;

namespace {

void collect_files(const detail::json& j, const fs::path& dir, std::set<std::string>& out) {
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    std::error_code ec;
    if (!s.empty() && fs::is_regular_file(dir / s, ec)) out.insert(fs::path(s).lexically_normal().generic_string());
  } else if (j.is_array() || j.is_object()) {
    for (const auto& v : j) collect_files(v, dir, out);
  }
}

InputDigest digest_file(const fs::path& path) {
  return {path.filename().generic_string(), git_blob_sha1_file(path)};
}

RunManifest start_manifest(std::string command) {
  RunManifest m;
  m.command = std::move(command);
  m.tool_version = kVersion;
  m.started_at = utc_now_iso8601();
  return m;
}

void finish_manifest(const fs::path& out, RunManifest m) {
  std::sort(m.inputs.begin(), m.inputs.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
  m.instance_hash = combined_hash(m.inputs);
  m.finished_at = utc_now_iso8601();
  write_manifest(out / "manifest.json", m);
}

std::string rep_file(const char* stem, std::size_t rep, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%03zu.%s", stem, rep, ext);
  return buf;
}

}  // namespace

int exit_code_for(const std::exception& e) noexcept {
  if (dynamic_cast<const InternalInvariantBreach*>(&e)) return kExitInternalBreach;
  if (dynamic_cast<const Error*>(&e)) return kExitSchemaError;
  return kExitInternalBreach;
}

std::vector<std::string> instance_input_files(const fs::path& config) {
  const auto root = detail::read_json(config);
  std::set<std::string> files;
  collect_files(root, config.parent_path(), files);
  files.insert(config.filename().generic_string());
  return {files.begin(), files.end()};
}

// ---------------------------------------------------------------------------

int cmd_ingest(const IngestArgs& args) {
  auto manifest = start_manifest("ingest");
  const auto inst = load_instance(args.config);
  const auto rows = read_missions_csv(args.missions);
  IngestOptions opts;
  opts.family = args.family;
  opts.ks_alpha = args.ks_alpha;
  const auto result = ingest(inst, rows, opts);
  const auto written = write_ingest_outputs(args.out, inst, result);

  manifest.instance_name = inst.name;
  manifest.inputs = digest_inputs(args.config.parent_path(), instance_input_files(args.config));
  manifest.inputs.push_back(digest_file(args.missions));
  finish_manifest(args.out, manifest);

  std::size_t parametric = 0;
  for (const auto& line : result.audit.lines()) parametric += line.find(",empirical,") == std::string::npos;
  std::cout << "ingested " << rows.size() << " missions: " << result.observations.size()
            << " calibration observations, " << parametric << " of "
            << result.audit.lines().size() << " phase fits parametric, " << written.size() << " files in " << args.out.string() << "\n";
  return kExitOk;
}

int cmd_calibrate(const CalibrateArgs& args) {
  auto manifest = start_manifest("calibrate");
  const auto obs = read_observations_csv(args.observations);

  BuildTableOptions opts;
  opts.min_count = args.min_count;
  opts.ratio_bounds = {args.ratio_lo, args.ratio_hi};
  if (!args.config.empty()) {
    const auto inst = load_instance(args.config);
    for (const auto& s : inst.travel.slots()) opts.slot_ids.push_back(s.id);
    manifest.instance_name = inst.name;
    manifest.inputs = digest_inputs(args.config.parent_path(), instance_input_files(args.config));
  } else {
    for (const auto& s : five_period_week_scheme()) opts.slot_ids.push_back(s.id);
  }
  const auto result = build_table(obs, opts);
  write_calibration_csv(args.out / "calibration.csv", result.table);
  write_calibration_report(args.out / "calibration_report.csv", result);

  manifest.inputs.push_back(digest_file(args.observations));
  finish_manifest(args.out, manifest);

  char pct[32];
  std::snprintf(pct, sizeof pct, "%.1f", result.defaulted_pct());
  std::cout << "calibrated " << result.table.entries().size() << " of " << result.groups_total << " groups ("
            << pct << "% defaulted to 1, " << result.removed_by_filter << " observations filtered)\n";
  return kExitOk;
}

int cmd_simulate(const SimulateArgs& args) {
  auto manifest = start_manifest("simulate");
  auto inst = load_instance(args.config, args.scenario);
  if (args.seed) inst.settings.base_seed = *args.seed;
  if (args.replications) inst.settings.replications = *args.replications;
  if (args.horizon_minutes) inst.settings.horizon_minutes = *args.horizon_minutes;
  if (args.warmup_minutes) inst.settings.warmup_minutes = *args.warmup_minutes;
  const auto& st = inst.settings;
  if (st.replications == 0) throw SchemaViolation("replications", "must be positive");
  if (!(st.horizon_minutes > 0.0)) throw SchemaViolation("horizon", "must be positive");
  if (!(st.warmup_minutes >= 0.0) || st.warmup_minutes >= st.horizon_minutes) {
    throw SchemaViolation("warmup", "must lie in [0, horizon)");
  }

  const std::size_t n = st.replications;
  const auto bases = fleet_bases(inst.fleet);
  SummaryOptions sopts;
  sopts.warmup_minutes = st.warmup_minutes;
  sopts.basis = args.basis;
  RunOptions ropts;
  ropts.keep_event_log = args.keep_events;
  ropts.check_invariants = args.check_invariants;

  struct RepOut {
    ReplicationSummary summary;
    ReplicationDigest digest;
    ZoneSlotCounts counts;
    InvariantReport invariants;
  };
  std::vector<RepOut> outs(n);
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto worker = [&] {
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= n) return;
      try {
        auto res = run_replication(inst, r, ropts);
        auto& o = outs[r];
        o.summary = summarize_replication(r, res.records, bases, sopts);
        o.digest = {r, res.event_count, res.event_digest};
        o.counts = count_zone_slot_calls(inst, res.records);
        o.invariants = std::move(res.invariants);
        if (args.keep_events) write_event_log(args.out / "events" / rep_file("rep", r, "log"), inst, res.events);
        if (args.keep_records) write_records_csv(args.out / "records" / rep_file("rep", r, "csv"), inst, res.records);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::size_t jobs = args.jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : args.jobs;
  jobs = std::min(jobs, n);
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);

  std::vector<ReplicationSummary> summaries;
  std::vector<ReplicationDigest> digests;
  std::vector<ZoneSlotCounts> counts;
  std::uint64_t violations = 0;
  std::string first_violation;
  for (auto& o : outs) {
    summaries.push_back(std::move(o.summary));
    digests.push_back(std::move(o.digest));
    counts.push_back(std::move(o.counts));
    violations += o.invariants.violations;
    if (first_violation.empty() && !o.invariants.messages.empty()) first_violation = o.invariants.messages.front();
  }

  write_replications_csv(args.out / "replications.csv", summaries);
  write_event_digests_csv(args.out / "events_digest.csv", digests);
  write_zone_slot_calls_csv(args.out / "zone_slot_calls.csv", inst, counts);
  if (n >= 2) {
    const auto stats = aggregate(summaries);
    write_summary_csv(args.out / "summary.csv", stats);
    write_coverage_csv(args.out / "coverage.csv", stats, sopts.thresholds);
    write_base_shares_csv(args.out / "base_shares.csv", stats);
  }

  manifest.instance_name = inst.name;
  manifest.scenario = inst.scenario.name;
  manifest.base_seed = st.base_seed;
  manifest.replications = n;
  manifest.horizon_minutes = st.horizon_minutes;
  manifest.warmup_minutes = st.warmup_minutes;
  manifest.inputs = digest_inputs(args.config.parent_path(), instance_input_files(args.config));
  finish_manifest(args.out, manifest);

  if (violations > 0) {
    throw InternalInvariantBreach(std::to_string(violations) + " violation(s); first: " + first_violation);
  }
  std::cout << "simulated " << n << " replication(s) of scenario '" << inst.scenario.name << "' into "
            << args.out.string() << "\n";
  return kExitOk;
}

int cmd_compare(const CompareArgs& args) {
  auto manifest = start_manifest("compare");
  const auto base_m = read_manifest(args.baseline / "manifest.json");
  const auto base_runs = read_replications_csv(args.baseline / "replications.csv");

  std::vector<PairedComparison> comparisons;
  for (const auto& alt_dir : args.alternatives) {
    const auto alt_m = read_manifest(alt_dir / "manifest.json");
    if (alt_m.base_seed != base_m.base_seed) throw SeedMismatch(base_m.base_seed, alt_m.base_seed);
    if (alt_m.replications != base_m.replications) {
      throw ReplicationCountMismatch(base_m.replications, alt_m.replications);
    }
    const auto alt_runs = read_replications_csv(alt_dir / "replications.csv");
    auto cmp = compare_coverage(base_m.scenario, base_runs, alt_m.scenario, alt_runs);
    write_paired_csv(args.out / ("paired_" + alt_m.scenario + ".csv"), cmp);
    comparisons.push_back(std::move(cmp));
    manifest.inputs.push_back({alt_m.scenario + "/replications.csv", git_blob_sha1_file(alt_dir / "replications.csv")});
  }
  const auto card = scenario_scorecard(comparisons);
  write_scorecard_csv(args.out / "scorecard.csv", card);

  manifest.instance_name = base_m.instance_name;
  manifest.scenario = base_m.scenario;
  manifest.base_seed = base_m.base_seed;
  manifest.replications = base_m.replications;
  manifest.horizon_minutes = base_m.horizon_minutes;
  manifest.warmup_minutes = base_m.warmup_minutes;
  manifest.inputs.push_back({"baseline/replications.csv", git_blob_sha1_file(args.baseline / "replications.csv")});
  finish_manifest(args.out, manifest);

  for (const auto& row : card) {
    std::cout << row.scenario << ": " << row.improvements << " improvement(s), " << row.worsenings
              << " worsening(s) - " << row.label << "\n";
  }
  return kExitOk;
}

int cmd_synth(const SynthArgs& args) {
  auto manifest = start_manifest("synth");
  const auto files = write_synth(args.out, args.profile, args.seed);
  manifest.instance_name = args.profile;
  manifest.base_seed = args.seed;
  finish_manifest(args.out, manifest);
  std::cout << "wrote " << args.profile << " instance to " << files.instance.string() << "\n";
  return kExitOk;
}

int cmd_validate(const ValidateArgs& args) {
  auto manifest = start_manifest("validate");
  const auto m = read_manifest(args.results / "manifest.json");
  const auto runs = read_replications_csv(args.results / "replications.csv");
  const auto stats = aggregate(runs);
  const auto targets = read_targets_csv(args.targets);
  const auto report = validate_against_history(stats, targets, args.tolerance_pct, args.kpis);
  const fs::path out = args.out.empty() ? args.results / "validation" : args.out;
  write_validation_csv(out / "validation.csv", report);

  manifest.instance_name = m.instance_name;
  manifest.scenario = m.scenario;
  manifest.base_seed = m.base_seed;
  manifest.replications = m.replications;
  manifest.horizon_minutes = m.horizon_minutes;
  manifest.warmup_minutes = m.warmup_minutes;
  manifest.inputs = {{"replications.csv", git_blob_sha1_file(args.results / "replications.csv")},
                     digest_file(args.targets)};
  finish_manifest(out, manifest);

  std::size_t failed = 0;
  for (const auto& r : report.rows) failed += !r.pass;
  std::cout << report.rows.size() - failed << " of " << report.rows.size() << " KPIs within "
            << format_double(args.tolerance_pct) << "%\n";
  for (const auto& r : report.rows) {
    if (!r.pass) std::cout << "  FAIL " << r.kpi << "\n";
  }
  return report.pass() ? kExitOk : kExitValidationFailed;
}

}  // namespace emsim
