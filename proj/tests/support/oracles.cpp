#include "oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace emsim::testing {
namespace {

double objective(std::span<const CalibrationObservation> obs, double alpha) {
  double sum = 0.0;
  for (const auto& o : obs) sum += std::abs(alpha * o.t_rs - o.t_obs);
  return sum;
}

GridMin scan(std::span<const CalibrationObservation> obs, double lo, double hi, double step) {
  GridMin best{lo, objective(obs, lo)};
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 0.5));
  for (long i = 1; i <= n; ++i) {
    const double a = lo + step * static_cast<double>(i);
    const double f = objective(obs, a);
    if (f < best.objective) best = {a, f};
  }
  return best;
}

}  // namespace

GridMin grid_search_alpha(std::span<const CalibrationObservation> obs, double step, double hi) {
  return scan(obs, step, hi, step);
}

GridMin refined_grid_alpha(std::span<const CalibrationObservation> obs, double hi) {
  auto best = scan(obs, 1e-3, hi, 1e-3);
  for (double step : {1e-6, 1e-9}) {
    const double width = 2000.0 * step;
    best = scan(obs, std::max(step, best.alpha - width), best.alpha + width, step);
  }
  return best;
}

double brute_coverage(std::span<const MissionRecord> records, UrgencyClass urgency, double threshold,
                      double warmup, std::size_t* n) {
  std::size_t total = 0, hit = 0;
  for (const auto& r : records) {
    const auto& c = r.call;
    if (c.arrival_minute < warmup) continue;
    if (c.status != CallStatus::ClosedOnSite && c.status != CallStatus::Transported) continue;
    if (!c.ts.arrive_scene) continue;
    if (urgency_of(c.triage_tag) != urgency) continue;
    ++total;
    if (*c.ts.arrive_scene - c.arrival_minute <= threshold) ++hit;
  }
  if (n) *n = total;
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(hit) / static_cast<double>(total);
}

std::map<std::string, double> brute_base_shares(std::span<const MissionRecord> records, double warmup) {
  std::map<std::string, double> counts;
  double total = 0.0;
  for (const auto& r : records) {
    if (r.call.arrival_minute < warmup || r.home_base.empty()) continue;
    counts[r.home_base] += 1.0;
    total += 1.0;
  }
  for (auto& [k, v] : counts) v = 100.0 * v / total;
  return counts;
}

double tabled_t975(std::size_t df) {
  switch (df) {
    case 1: return 12.70620474;
    case 2: return 4.302652730;
    case 3: return 3.182446305;
    case 4: return 2.776445105;
    case 9: return 2.262157163;
    case 19: return 2.093024054;
    case 29: return 2.045229642;
    default: throw std::out_of_range("no tabled quantile for this df");
  }
}

}  // namespace emsim::testing
