#pragma once

#include "emsim/engine.hpp"
#include "emsim/kpi.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace emsim {

struct InputDigest {
  std::string path;    ///< as given on the command line / in the config
  std::string sha1;    ///< git blob id of the content
};

/// Provenance of one command invocation. Everything except the two wall
/// clock fields is a pure function of the inputs and flags.
struct RunManifest {
  std::string command;
  std::string tool_version;
  std::string instance_name;
  std::string instance_hash;  ///< SHA-256 over the sorted input digests
  std::string scenario;
  std::uint64_t base_seed = 0;
  std::size_t replications = 0;
  double horizon_minutes = 0.0;
  double warmup_minutes = 0.0;
  std::vector<InputDigest> inputs;
  std::string started_at;   ///< UTC ISO-8601
  std::string finished_at;  ///< UTC ISO-8601
};

std::string utc_now_iso8601();
/// Digests of `files` (paths relative to `root` are recorded as given).
std::vector<InputDigest> digest_inputs(const std::filesystem::path& root,
                                       const std::vector<std::string>& files);
std::string combined_hash(const std::vector<InputDigest>& inputs);

void write_manifest(const std::filesystem::path& path, const RunManifest& m);
RunManifest read_manifest(const std::filesystem::path& path);

/// Long format "replication,kpi,value".
void write_replications_csv(const std::filesystem::path& path, const std::vector<ReplicationSummary>& runs);
std::vector<ReplicationSummary> read_replications_csv(const std::filesystem::path& path);

/// "kpi,n,avg,lb,ub,sd"
void write_summary_csv(const std::filesystem::path& path, const std::map<std::string, SummaryStat>& stats);
std::map<std::string, SummaryStat> read_summary_csv(const std::filesystem::path& path);

/// "urgency,threshold,n,avg,lb,ub" for the coverage KPIs in `stats`.
void write_coverage_csv(const std::filesystem::path& path, const std::map<std::string, SummaryStat>& stats,
                        const std::vector<double>& thresholds);
/// "base,avg,lb,ub"
void write_base_shares_csv(const std::filesystem::path& path, const std::map<std::string, SummaryStat>& stats);

/// One row per call, all timestamps.
void write_records_csv(const std::filesystem::path& path, const SimulationInstance& inst,
                       const std::vector<MissionRecord>& records);
using ZoneSlotCounts = std::vector<std::vector<std::size_t>>;  ///< [zone][demand slot]
/// Calls arriving in the measured window per zone and demand slot.
ZoneSlotCounts count_zone_slot_calls(const SimulationInstance& inst, const std::vector<MissionRecord>& records);
/// "replication,zone,slot,calls", replications numbered by position.
void write_zone_slot_calls_csv(const std::filesystem::path& path, const SimulationInstance& inst,
                               const std::vector<ZoneSlotCounts>& per_replication);
struct ReplicationDigest {
  std::size_t replication = 0;
  std::uint64_t events = 0;
  std::string sha256;
};
void write_event_digests_csv(const std::filesystem::path& path, const std::vector<ReplicationDigest>& rows);
void write_event_log(const std::filesystem::path& path, const SimulationInstance& inst,
                     const std::vector<EventLogEntry>& events);

void write_paired_csv(const std::filesystem::path& path, const PairedComparison& cmp);
std::vector<PairedEntry> read_paired_csv(const std::filesystem::path& path);
void write_scorecard_csv(const std::filesystem::path& path, const std::vector<ScorecardRow>& rows);
void write_validation_csv(const std::filesystem::path& path, const ValidationReport& report);

/// "kpi,mu"
std::map<std::string, double> read_targets_csv(const std::filesystem::path& path);
void write_targets_csv(const std::filesystem::path& path, const std::map<std::string, double>& targets);

}  // namespace emsim
