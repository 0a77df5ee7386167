#include "emsim/kpi.hpp"

#include "emsim/error.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace emsim {

bool in_coverage_population(const MissionRecord& r, double warmup_minutes) {
  return r.call.arrival_minute >= warmup_minutes && !r.censored &&
         r.call.status != CallStatus::CancelledEnRoute && r.response_time().has_value();
}

UrgencyClass coverage_urgency(const MissionRecord& r, CoverageBasis basis) {
  return basis == CoverageBasis::Triage ? r.call.triage_urgency() : r.call.urgency();
}

CoverageResult coverage(std::span<const MissionRecord> records, UrgencyClass urgency, double threshold,
                        double warmup_minutes, CoverageBasis basis) {
  CoverageResult out;
  out.urgency = urgency;
  out.threshold_minutes = threshold;
  std::size_t hit = 0;
  for (const auto& r : records) {
    if (!in_coverage_population(r, warmup_minutes) || coverage_urgency(r, basis) != urgency) continue;
    ++out.n_calls;
    if (*r.response_time() <= threshold) ++hit;
  }
  if (out.n_calls == 0) throw NoCalls(std::string(to_string(urgency)));
  out.coverage_pct = 100.0 * static_cast<double>(hit) / static_cast<double>(out.n_calls);
  return out;
}

std::map<std::string, double> base_shares(std::span<const MissionRecord> records,
                                          std::span<const std::string> bases, double warmup_minutes) {
  std::map<std::string, double> counts;
  for (const auto& b : bases) counts[b] = 0.0;
  double total = 0.0;
  for (const auto& r : records) {
    if (r.call.arrival_minute < warmup_minutes || !r.ambulance) continue;
    counts[r.home_base] += 1.0;
    total += 1.0;
  }
  if (total > 0.0) {
    for (auto& [base, n] : counts) n = 100.0 * n / total;
  }
  return counts;
}

std::string coverage_kpi(UrgencyClass urgency, double threshold) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "coverage_%s_%g",
                urgency == UrgencyClass::Urgent ? "urgent" : "nonurgent", threshold);
  return buf;
}

std::string calls_kpi(UrgencyClass urgency) {
  return urgency == UrgencyClass::Urgent ? "calls_urgent" : "calls_nonurgent";
}

std::string base_share_kpi(std::string_view base) { return "base_share_" + std::string(base); }

std::string rt_mean_kpi(UrgencyClass urgency) {
  return urgency == UrgencyClass::Urgent ? "rt_mean_urgent" : "rt_mean_nonurgent";
}

std::optional<double> ReplicationSummary::get(std::string_view name) const {
  for (const auto& [k, v] : kpis) {
    if (k == name) return v;
  }
  return std::nullopt;
}

std::vector<std::string> fleet_bases(std::span<const Ambulance> fleet) {
  std::set<std::string> bases;
  for (const auto& a : fleet) bases.insert(a.home_base);
  return {bases.begin(), bases.end()};
}

ReplicationSummary summarize_replication(std::size_t replication, std::span<const MissionRecord> records,
                                         std::span<const std::string> bases, const SummaryOptions& options) {
  ReplicationSummary s;
  s.replication = replication;

  double total = 0.0;
  std::array<double, 2> calls{};
  std::array<double, 2> rt_sum{};
  std::array<std::size_t, 2> rt_n{};
  for (const auto& r : records) {
    if (r.call.arrival_minute < options.warmup_minutes) continue;
    total += 1.0;
    calls[index_of(r.call.triage_urgency())] += 1.0;
    if (in_coverage_population(r, options.warmup_minutes)) {
      const auto u = index_of(coverage_urgency(r, options.basis));
      rt_sum[u] += *r.response_time();
      ++rt_n[u];
    }
  }
  s.kpis.emplace_back(kCallsTotalKpi, total);
  for (auto u : kAllUrgencies) s.kpis.emplace_back(calls_kpi(u), calls[index_of(u)]);
  for (auto u : kAllUrgencies) {
    if (rt_n[index_of(u)] == 0) continue;
    for (double t : options.thresholds) {
      s.kpis.emplace_back(coverage_kpi(u, t),
                          coverage(records, u, t, options.warmup_minutes, options.basis).coverage_pct);
    }
    s.kpis.emplace_back(rt_mean_kpi(u), rt_sum[index_of(u)] / static_cast<double>(rt_n[index_of(u)]));
  }
  for (const auto& [base, share] : base_shares(records, bases, options.warmup_minutes)) {
    s.kpis.emplace_back(base_share_kpi(base), share);
  }
  return s;
}

double t_quantile(double p, double df) {
  boost::math::students_t dist(df);
  return boost::math::quantile(dist, p);
}

SummaryStat summarize(std::span<const double> values, double confidence) {
  if (values.size() < 2) throw TooFewReplications(values.size());
  SummaryStat s;
  s.n = values.size();
  const double n = static_cast<double>(s.n);
  double sum = 0.0;
  for (double v : values) sum += v;
  s.avg = sum / n;
  double ss = 0.0;
  for (double v : values) ss += (v - s.avg) * (v - s.avg);
  s.sd = std::sqrt(ss / (n - 1.0));
  s.half_width = s.sd == 0.0 ? 0.0 : t_quantile(0.5 + confidence / 2.0, n - 1.0) * s.sd / std::sqrt(n);
  s.lb = s.avg - s.half_width;
  s.ub = s.avg + s.half_width;
  return s;
}

std::map<std::string, SummaryStat> aggregate(std::span<const ReplicationSummary> summaries,
                                             double confidence) {
  std::map<std::string, SummaryStat> out;
  if (summaries.empty()) return out;
  for (const auto& [name, first] : summaries.front().kpis) {
    std::vector<double> values;
    values.reserve(summaries.size());
    for (const auto& s : summaries) {
      if (auto v = s.get(name)) values.push_back(*v);
    }
    if (values.size() == summaries.size()) out[name] = summarize(values, confidence);
  }
  return out;
}

bool ValidationReport::pass() const noexcept {
  return std::all_of(rows.begin(), rows.end(), [](const ValidationRow& r) { return r.pass; });
}

double validation_scale(std::string_view kpi, double mu) {
  if (kpi.starts_with("coverage_") || kpi.starts_with("base_share_")) return 100.0;
  return std::abs(mu);
}

ValidationReport validate_against_history(const std::map<std::string, SummaryStat>& stats,
                                          const std::map<std::string, double>& targets,
                                          double tolerance_pct, std::span<const std::string> kpis) {
  std::vector<std::string> names(kpis.begin(), kpis.end());
  if (names.empty()) {
    for (const auto& [k, mu] : targets) names.push_back(k);
  }
  ValidationReport report;
  report.tolerance_pct = tolerance_pct;
  for (const auto& name : names) {
    auto t = targets.find(name);
    auto s = stats.find(name);
    if (t == targets.end() || s == stats.end()) throw MissingTarget(name);
    ValidationRow row;
    row.kpi = name;
    row.mu = t->second;
    row.stat = s->second;
    row.gap_lb = std::abs(row.stat.lb - row.mu);
    row.gap_ub = std::abs(row.stat.ub - row.mu);
    row.scale = validation_scale(name, row.mu);
    row.tolerance = tolerance_pct / 100.0 * row.scale;
    row.pass = std::max(row.gap_lb, row.gap_ub) <= row.tolerance;
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::SignificantImprovement: return "SignificantImprovement";
    case Verdict::SignificantWorsening: return "SignificantWorsening";
    case Verdict::NotSignificant: return "NotSignificant";
  }
  return "?";
}

Verdict parse_verdict(std::string_view text) {
  for (auto v : {Verdict::SignificantImprovement, Verdict::SignificantWorsening, Verdict::NotSignificant}) {
    if (to_string(v) == text) return v;
  }
  throw SchemaViolation("verdict", "unknown verdict '" + std::string(text) + "'");
}

Verdict verdict_of(double lo, double hi) noexcept {
  if (hi < 0.0) return Verdict::SignificantImprovement;
  if (lo > 0.0) return Verdict::SignificantWorsening;
  return Verdict::NotSignificant;
}

PairedResult paired_t(std::span<const double> baseline, std::span<const double> alternative,
                      double confidence) {
  if (baseline.size() != alternative.size()) throw LengthMismatch(baseline.size(), alternative.size());
  std::vector<double> d(baseline.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = baseline[i] - alternative[i];
  const auto s = summarize(d, confidence);
  PairedResult r;
  r.mean_diff = s.avg;
  r.lo = s.lb;
  r.hi = s.ub;
  r.sd = s.sd;
  r.n = s.n;
  r.verdict = verdict_of(r.lo, r.hi);
  return r;
}

namespace {

std::vector<double> kpi_column(std::span<const ReplicationSummary> runs, const std::string& name) {
  std::vector<double> out;
  out.reserve(runs.size());
  for (const auto& r : runs) {
    auto v = r.get(name);
    if (!v) throw IncompleteGrid(name + " missing in replication " + std::to_string(r.replication));
    out.push_back(*v);
  }
  return out;
}

std::vector<ReplicationSummary> by_replication(std::span<const ReplicationSummary> runs) {
  std::vector<ReplicationSummary> sorted(runs.begin(), runs.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.replication < b.replication; });
  return sorted;
}

}  // namespace

PairedComparison compare_coverage(std::string baseline_name, std::span<const ReplicationSummary> baseline,
                                  std::string alternative_name,
                                  std::span<const ReplicationSummary> alternative,
                                  std::span<const double> thresholds) {
  if (baseline.size() != alternative.size()) {
    throw ReplicationCountMismatch(baseline.size(), alternative.size());
  }
  const auto base = by_replication(baseline);
  const auto alt = by_replication(alternative);
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (base[i].replication != alt[i].replication) {
      throw IncompleteGrid("replication indices differ between runs");
    }
  }
  PairedComparison out{std::move(baseline_name), std::move(alternative_name), {}};
  for (auto u : kAllUrgencies) {
    for (double t : thresholds) {
      const auto name = coverage_kpi(u, t);
      const auto a = kpi_column(base, name);
      const auto b = kpi_column(alt, name);
      out.entries.push_back({u, t, paired_t(a, b)});
    }
  }
  return out;
}

std::string classify(int improvements, int worsenings) {
  if (improvements > 0 && worsenings > 0) return "Mixed";
  if (worsenings > 0) return worsenings >= 10 ? "Systematically worsening" : "Mild negative";
  if (improvements >= 13) return "Dominant";
  if (improvements >= 10) return "Strong improvement";
  if (improvements >= 2) return "Selective improvement";
  return "Essentially neutral";
}

std::vector<ScorecardRow> scenario_scorecard(std::span<const PairedComparison> comparisons,
                                             std::span<const double> thresholds) {
  std::vector<ScorecardRow> rows;
  for (const auto& c : comparisons) {
    ScorecardRow row;
    row.scenario = c.alternative;
    for (auto u : kAllUrgencies) {
      for (double t : thresholds) {
        auto it = std::find_if(c.entries.begin(), c.entries.end(),
                               [&](const PairedEntry& e) { return e.urgency == u && e.threshold == t; });
        if (it == c.entries.end()) {
          throw IncompleteGrid(c.alternative + " lacks " + coverage_kpi(u, t));
        }
        if (it->result.verdict == Verdict::SignificantImprovement) ++row.improvements;
        if (it->result.verdict == Verdict::SignificantWorsening) ++row.worsenings;
      }
    }
    row.label = classify(row.improvements, row.worsenings);
    rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end(), [](const ScorecardRow& a, const ScorecardRow& b) {
    if (a.improvements != b.improvements) return a.improvements > b.improvements;
    if (a.worsenings != b.worsenings) return a.worsenings < b.worsenings;
    return a.scenario < b.scenario;
  });
  return rows;
}

}  // namespace emsim
