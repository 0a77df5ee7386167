#include "emsim/results_io.hpp"

#include "emsim/csv.hpp"
#include "emsim/digest.hpp"
#include "emsim/error.hpp"
#include "json_io.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <sstream>

namespace emsim {

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

const char* urgency_label(UrgencyClass u) { return u == UrgencyClass::Urgent ? "urgent" : "nonurgent"; }

UrgencyClass parse_urgency_label(const std::string& s, const std::string& ctx) {
  if (s == "urgent") return UrgencyClass::Urgent;
  if (s == "nonurgent") return UrgencyClass::NonUrgent;
  return parse_urgency(s, ctx);
}

}  // namespace

std::string utc_now_iso8601() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<InputDigest> digest_inputs(const std::filesystem::path& root,
                                       const std::vector<std::string>& files) {
  std::vector<InputDigest> out;
  for (const auto& f : files) out.push_back({f, git_blob_sha1_file(root / f)});
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
  return out;
}

std::string combined_hash(const std::vector<InputDigest>& inputs) {
  std::string text;
  for (const auto& d : inputs) text += d.path + " " + d.sha1 + "\n";
  return sha256_hex(text);
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
  detail::json j;
  j["command"] = m.command;
  j["tool_version"] = m.tool_version;
  j["instance_name"] = m.instance_name;
  j["instance_hash"] = m.instance_hash;
  j["scenario"] = m.scenario;
  j["base_seed"] = m.base_seed;
  j["replications"] = m.replications;
  j["horizon_minutes"] = m.horizon_minutes;
  j["warmup_minutes"] = m.warmup_minutes;
  detail::json inputs = detail::json::array();
  for (const auto& d : m.inputs) inputs.push_back({{"path", d.path}, {"git_blob_sha1", d.sha1}});
  j["inputs"] = inputs;
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  detail::write_json(path, j);
}

RunManifest read_manifest(const std::filesystem::path& path) {
  const auto j = detail::read_json(path);
  RunManifest m;
  const std::string ctx = path.string();
  m.command = detail::get_string(j, "command", ctx);
  if (j.contains("tool_version")) m.tool_version = j["tool_version"].get<std::string>();
  if (j.contains("instance_name")) m.instance_name = j["instance_name"].get<std::string>();
  if (j.contains("instance_hash")) m.instance_hash = j["instance_hash"].get<std::string>();
  if (j.contains("scenario")) m.scenario = j["scenario"].get<std::string>();
  m.base_seed = detail::require(j, "base_seed", ctx).get<std::uint64_t>();
  m.replications = detail::require(j, "replications", ctx).get<std::size_t>();
  if (j.contains("horizon_minutes")) m.horizon_minutes = j["horizon_minutes"].get<double>();
  if (j.contains("warmup_minutes")) m.warmup_minutes = j["warmup_minutes"].get<double>();
  if (j.contains("inputs")) {
    for (const auto& d : j["inputs"]) {
      m.inputs.push_back({d.at("path").get<std::string>(), d.at("git_blob_sha1").get<std::string>()});
    }
  }
  if (j.contains("started_at")) m.started_at = j["started_at"].get<std::string>();
  if (j.contains("finished_at")) m.finished_at = j["finished_at"].get<std::string>();
  return m;
}

void write_replications_csv(const std::filesystem::path& path, const std::vector<ReplicationSummary>& runs) {
  std::ostringstream out;
  CsvWriter w(out);
  w.row({"replication", "kpi", "value"});
  for (const auto& r : runs) {
    for (const auto& [k, v] : r.kpis) w.row({std::to_string(r.replication), k, format_double(v)});
  }
  write_text_file(path, out.str());
}

std::vector<ReplicationSummary> read_replications_csv(const std::filesystem::path& path) {
  const auto t = read_csv(path);
  const auto c_rep = t.require_column("replication");
  const auto c_kpi = t.require_column("kpi");
  const auto c_val = t.require_column("value");
  std::vector<ReplicationSummary> out;
  for (std::size_t r = 0; r < t.size(); ++r) {
    const auto rep = static_cast<std::size_t>(t.integer(r, c_rep));
    if (out.empty() || out.back().replication != rep) {
      out.push_back(ReplicationSummary{rep, {}});
    }
    out.back().kpis.emplace_back(t.text(r, c_kpi), t.number(r, c_val));
  }
  return out;
}

void write_summary_csv(const std::filesystem::path& path, const std::map<std::string, SummaryStat>& stats) {
  std::ostringstream out;
  CsvWriter w(out);
  w.row({"kpi", "n", "avg", "lb", "ub", "sd"});
  for (const auto& [k, s] : stats) {
    w.row({k, std::to_string(s.n), format_double(s.avg), format_double(s.lb), format_double(s.ub),
           format_double(s.sd)});
  }
  write_text_file(path, out.str());
}

std::map<std::string, SummaryStat> read_summary_csv(const std::filesystem::path& path) {
  const auto t = read_csv(path);
  const auto c_kpi = t.require_column("kpi");
  const auto c_n = t.require_column("n");
  const auto c_avg = t.require_column("avg");
  const auto c_lb = t.require_column("lb");
  const auto c_ub = t.require_column("ub");
  const auto c_sd = t.require_column("sd");
  std::map<std::string, SummaryStat> out;
  for (std::size_t r = 0; r < t.size(); ++r) {
    SummaryStat s;
    s.n = static_cast<std::size_t>(t.integer(r, c_n));
    s.avg = t.number(r, c_avg);
    s.lb = t.number(r, c_lb);
    s.ub = t.number(r, c_ub);
    s.sd = t.number(r, c_sd);
    s.half_width = (s.ub - s.lb) / 2.0;
    out[t.text(r, c_kpi)] = s;
  }
  return out;
}

void write_coverage_csv(const std::filesystem::path& path, const std::map<std::string, SummaryStat>& stats,
                        const std::vector<double>& thresholds) {
  std::ostringstream out;
  CsvWriter w(out);
  w.row({"urgency", "threshold", "n", "avg", "lb", "ub"});
  for (auto u : kAllUrgencies) {
    for (double t : thresholds) {
      auto it = stats.find(coverage_kpi(u, t));
      if (it == stats.end()) continue;
      const auto& s = it->second;
      w.row({urgency_label(u), format_double(t), std::to_string(s.n), format_double(s.avg),
             format_double(s.lb), format_double(s.ub)});
    }
  }
  write_text_file(path, out.str());
}

void write_base_shares_csv(const std::filesystem::path& path, const std::map<std::string, SummaryStat>& stats) {
  std::ostringstream out;
  CsvWriter w(out);
  w.row({"base", "avg", "lb", "ub"});
  const std::string prefix = base_share_kpi("");
  for (const auto& [k, s] : stats) {
    if (!k.starts_with(prefix)) continue;
    w.row({k.substr(prefix.size()), format_double(s.avg), format_double(s.lb), format_double(s.ub)});
  }
  write_text_file(path, out.str());
}

void write_records_csv(const std::filesystem::path& path, const SimulationInstance& inst,
                       const std::vector<MissionRecord>& records) {
  std::ostringstream out;
  CsvWriter w(out);
  w.row({"call_id", "arrival", "zone", "square", "scene_point", "triage_tag", "onscene_tag",
         "pathology_group", "status", "ambulance", "home_base", "origin", "ed", "in_warmup", "censored",
         "queued", "triage_done", "assigned", "depart", "arrive_scene", "depart_scene", "arrive_ed",
         "offload_start", "offload_done", "mission_end", "sanitization_start", "sanitization_end",
         "response_time"});
  for (const auto& r : records) {
    const auto& c = r.call;
    w.row({std::to_string(c.call_id), format_double(c.arrival_minute), inst.demand.zones.at(c.zone).id,
           inst.demand.squares.at(c.square).id, inst.network.at(c.scene_point).id,
           std::string(to_string(c.triage_tag)),
           c.onscene_tag ? std::string(to_string(*c.onscene_tag)) : std::string(), c.pathology_group,
           std::string(to_string(c.status)), r.ambulance_id, r.home_base, std::string(to_string(r.origin)),
           r.ed, r.in_warmup ? "1" : "0", r.censored ? "1" : "0", r.was_queued ? "1" : "0",
           opt(c.ts.triage_done), opt(c.ts.assigned), opt(c.ts.depart_base), opt(c.ts.arrive_scene),
           opt(c.ts.depart_scene), opt(c.ts.arrive_ed), opt(c.ts.offload_start), opt(c.ts.offload_done),
           opt(c.ts.mission_end), opt(r.sanitization_start), opt(r.sanitization_end), opt(r.response_time())});
  }
  write_text_file(path, out.str());
}

ZoneSlotCounts count_zone_slot_calls(const SimulationInstance& inst, const std::vector<MissionRecord>& records) {
  const auto& scheme = inst.demand.scheme;
  ZoneSlotCounts counts(inst.demand.zones.size(), std::vector<std::size_t>(scheme.size(), 0));
  for (const auto& r : records) {
    if (r.call.arrival_minute < inst.settings.warmup_minutes) continue;
    ++counts[r.call.zone][scheme.slot_at(r.call.arrival_minute)];
  }
  return counts;
}

void write_zone_slot_calls_csv(const std::filesystem::path& path, const SimulationInstance& inst,
                               const std::vector<ZoneSlotCounts>& per_replication) {
  const auto& scheme = inst.demand.scheme;
  std::ostringstream out;
  CsvWriter w(out);
  w.row({"replication", "zone", "slot", "calls"});
  for (std::size_t rep = 0; rep < per_replication.size(); ++rep) {
    const auto& counts = per_replication[rep];
    for (std::size_t z = 0; z < counts.size(); ++z) {
      for (std::size_t s = 0; s < scheme.size(); ++s) {
        w.row({std::to_string(rep), inst.demand.zones[z].id, scheme.label(s), std::to_string(counts[z][s])});
      }
    }
  }
  write_text_file(path, out.str());
}

void write_event_digests_csv(const std::filesystem::path& path, const std::vector<ReplicationDigest>& rows) {
  std::ostringstream out;
  CsvWriter w(out);
  w.row({"replication", "events", "sha256"});
  for (const auto& r : rows) w.row({std::to_string(r.replication), std::to_string(r.events), r.sha256});
  write_text_file(path, out.str());
}

void write_event_log(const std::filesystem::path& path, const SimulationInstance& inst,
                     const std::vector<EventLogEntry>& events) {
  std::string text;
  text.reserve(events.size() * 48);
  for (const auto& e : events) {
    text += format_event(e, inst.fleet);
    text.push_back('\n');
  }
  write_text_file(path, text);
}

void write_paired_csv(const std::filesystem::path& path, const PairedComparison& cmp) {
  std::ostringstream out;
  CsvWriter w(out);
  w.row({"baseline", "scenario", "urgency", "threshold", "n", "mean_diff", "ci_lo", "ci_hi", "verdict"});
  for (const auto& e : cmp.entries) {
    w.row({cmp.baseline, cmp.alternative, urgency_label(e.urgency), format_double(e.threshold),
           std::to_string(e.result.n), format_double(e.result.mean_diff), format_double(e.result.lo),
           format_double(e.result.hi), std::string(to_string(e.result.verdict))});
  }
  write_text_file(path, out.str());
}

std::vector<PairedEntry> read_paired_csv(const std::filesystem::path& path) {
  const auto t = read_csv(path);
  const auto c_u = t.require_column("urgency");
  const auto c_t = t.require_column("threshold");
  const auto c_n = t.require_column("n");
  const auto c_m = t.require_column("mean_diff");
  const auto c_lo = t.require_column("ci_lo");
  const auto c_hi = t.require_column("ci_hi");
  const auto c_v = t.require_column("verdict");
  std::vector<PairedEntry> out;
  for (std::size_t r = 0; r < t.size(); ++r) {
    PairedEntry e;
    e.urgency = parse_urgency_label(t.text(r, c_u), "paired.urgency");
    e.threshold = t.number(r, c_t);
    e.result.n = static_cast<std::size_t>(t.integer(r, c_n));
    e.result.mean_diff = t.number(r, c_m);
    e.result.lo = t.number(r, c_lo);
    e.result.hi = t.number(r, c_hi);
    e.result.verdict = parse_verdict(t.text(r, c_v));
    out.push_back(e);
  }
  return out;
}

void write_scorecard_csv(const std::filesystem::path& path, const std::vector<ScorecardRow>& rows) {
  std::ostringstream out;
  CsvWriter w(out);
  w.row({"scenario", "improvements", "worsenings", "label"});
  for (const auto& r : rows) {
    w.row({r.scenario, std::to_string(r.improvements), std::to_string(r.worsenings), r.label});
  }
  write_text_file(path, out.str());
}

void write_validation_csv(const std::filesystem::path& path, const ValidationReport& report) {
  std::ostringstream out;
  CsvWriter w(out);
  w.row({"kpi", "mu", "avg", "lb", "ub", "gap_lb", "gap_ub", "tolerance", "pass"});
  for (const auto& r : report.rows) {
    w.row({r.kpi, format_double(r.mu), format_double(r.stat.avg), format_double(r.stat.lb),
           format_double(r.stat.ub), format_double(r.gap_lb), format_double(r.gap_ub),
           format_double(r.tolerance), r.pass ? "1" : "0"});
  }
  write_text_file(path, out.str());
}

std::map<std::string, double> read_targets_csv(const std::filesystem::path& path) {
  const auto t = read_csv(path);
  const auto c_k = t.require_column("kpi");
  const auto c_mu = t.require_column("mu");
  std::map<std::string, double> out;
  for (std::size_t r = 0; r < t.size(); ++r) out[t.text(r, c_k)] = t.number(r, c_mu);
  return out;
}

void write_targets_csv(const std::filesystem::path& path, const std::map<std::string, double>& targets) {
  std::ostringstream out;
  CsvWriter w(out);
  w.row({"kpi", "mu"});
  for (const auto& [k, v] : targets) w.row({k, format_double(v)});
  write_text_file(path, out.str());
}

}  // namespace emsim
