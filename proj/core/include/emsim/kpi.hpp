#pragma once

#include "emsim/engine.hpp"
#include "emsim/types.hpp"

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace emsim {

/// Response-time thresholds (minutes) reported throughout.
inline constexpr std::array<double, 7> kStandardThresholds{10, 15, 20, 30, 40, 50, 60};

/// Which tag classifies a call for coverage: the triage tag (known when the
/// response-time clock starts) or the revised on-scene tag.
enum class CoverageBasis : std::uint8_t { Triage, OnScene };

struct CoverageResult {
  UrgencyClass urgency = UrgencyClass::Urgent;
  double threshold_minutes = 0.0;
  double coverage_pct = 0.0;
  std::size_t n_calls = 0;
};

/// True when the record enters coverage: arrival at or after the warm-up,
/// not censored, not cancelled, and served on scene.
bool in_coverage_population(const MissionRecord& r, double warmup_minutes);
UrgencyClass coverage_urgency(const MissionRecord& r, CoverageBasis basis);

/// Percentage of eligible records of `urgency` with response time <=
/// threshold. Throws NoCalls when none are eligible.
CoverageResult coverage(std::span<const MissionRecord> records, UrgencyClass urgency, double threshold,
                        double warmup_minutes, CoverageBasis basis = CoverageBasis::Triage);

/// Share (percent) of measured, assigned calls served by ambulances of each
/// base, credited to the home base even on direct redispatch. Every base in
/// `bases` appears in the result.
std::map<std::string, double> base_shares(std::span<const MissionRecord> records,
                                          std::span<const std::string> bases, double warmup_minutes);

// KPI names.
std::string coverage_kpi(UrgencyClass urgency, double threshold);
std::string calls_kpi(UrgencyClass urgency);
std::string base_share_kpi(std::string_view base);
inline constexpr const char* kCallsTotalKpi = "calls_total";
std::string rt_mean_kpi(UrgencyClass urgency);

/// Per-replication KPI vector, in a fixed canonical order.
struct ReplicationSummary {
  std::size_t replication = 0;
  std::vector<std::pair<std::string, double>> kpis;

  std::optional<double> get(std::string_view name) const;
};

struct SummaryOptions {
  double warmup_minutes = 21600.0;
  CoverageBasis basis = CoverageBasis::Triage;
  std::vector<double> thresholds{kStandardThresholds.begin(), kStandardThresholds.end()};
};

/// Bases with at least one vehicle in `fleet`, sorted.
std::vector<std::string> fleet_bases(std::span<const Ambulance> fleet);

/// Call counts by triage urgency, coverage per (urgency, threshold) when the
/// class has eligible calls, mean response time, and base shares.
ReplicationSummary summarize_replication(std::size_t replication, std::span<const MissionRecord> records,
                                         std::span<const std::string> bases, const SummaryOptions& options);

struct SummaryStat {
  double avg = 0.0;
  double lb = 0.0;
  double ub = 0.0;
  double sd = 0.0;
  double half_width = 0.0;
  std::size_t n = 0;
};

/// Two-sided quantile t_{p, df} of Student's t distribution.
double t_quantile(double p, double df);

/// Mean and 95% t-interval. Throws TooFewReplications when n < 2.
SummaryStat summarize(std::span<const double> values, double confidence = 0.95);

/// Aggregates every KPI present in all summaries.
std::map<std::string, SummaryStat> aggregate(std::span<const ReplicationSummary> summaries,
                                             double confidence = 0.95);

struct ValidationRow {
  std::string kpi;
  double mu = 0.0;
  SummaryStat stat;
  double gap_lb = 0.0;  ///< |LB - mu|
  double gap_ub = 0.0;  ///< |UB - mu|
  double scale = 0.0;
  double tolerance = 0.0;  ///< absolute, tolerance_pct% of scale
  bool pass = false;
};

struct ValidationReport {
  std::vector<ValidationRow> rows;
  double tolerance_pct = 3.0;
  bool pass() const noexcept;
};

/// Percentage KPIs (coverage, base shares) are judged on a 0-100 scale;
/// counts and times relative to their target.
double validation_scale(std::string_view kpi, double mu);

/// Compares each KPI in `kpis` (default: every target) against its target.
/// A KPI passes when both gaps are within tolerance_pct% of its scale.
/// Throws MissingTarget for a requested KPI without target or result.
ValidationReport validate_against_history(const std::map<std::string, SummaryStat>& stats,
                                          const std::map<std::string, double>& targets,
                                          double tolerance_pct = 3.0,
                                          std::span<const std::string> kpis = {});

enum class Verdict : std::uint8_t { SignificantImprovement, SignificantWorsening, NotSignificant };

std::string_view to_string(Verdict v) noexcept;
Verdict parse_verdict(std::string_view text);
/// Improvement iff hi < 0, worsening iff lo > 0.
Verdict verdict_of(double lo, double hi) noexcept;

struct PairedResult {
  double mean_diff = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double sd = 0.0;
  std::size_t n = 0;
  Verdict verdict = Verdict::NotSignificant;
};

/// d_i = baseline_i - alternative_i; mean and t-interval of d.
/// Throws LengthMismatch, TooFewReplications.
PairedResult paired_t(std::span<const double> baseline, std::span<const double> alternative,
                      double confidence = 0.95);

/// For coverage, baseline - alternative < 0 means the alternative covers
/// more calls, hence an improvement.
struct PairedEntry {
  UrgencyClass urgency = UrgencyClass::Urgent;
  double threshold = 0.0;
  PairedResult result;
};

struct PairedComparison {
  std::string baseline;
  std::string alternative;
  std::vector<PairedEntry> entries;
};

/// Paired coverage comparison over every (urgency, threshold). Summaries are
/// matched by replication index. Throws ReplicationCountMismatch,
/// IncompleteGrid when a KPI is missing.
PairedComparison compare_coverage(std::string baseline_name, std::span<const ReplicationSummary> baseline,
                                  std::string alternative_name,
                                  std::span<const ReplicationSummary> alternative,
                                  std::span<const double> thresholds = kStandardThresholds);

struct ScorecardRow {
  std::string scenario;
  int improvements = 0;
  int worsenings = 0;
  std::string label;
};

/// Label for an (improvements, worsenings) tally.
std::string classify(int improvements, int worsenings);

/// Tallies significant verdicts per comparison over the full 7 x 2 grid,
/// sorted by improvements desc, worsenings asc, name. Throws IncompleteGrid.
std::vector<ScorecardRow> scenario_scorecard(std::span<const PairedComparison> comparisons,
                                             std::span<const double> thresholds = kStandardThresholds);

}  // namespace emsim
