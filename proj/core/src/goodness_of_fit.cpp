#include "emsim/goodness_of_fit.hpp"

#include "emsim/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>

namespace emsim {

double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw EmptySample();
  std::vector<double> xs(sample.begin(), sample.end());
  std::sort(xs.begin(), xs.end());
  const auto n = static_cast<double>(xs.size());

  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    // Upper gap: F_n jumps to (last index of a tie group)/n at x_i.
    const double upper = static_cast<double>(i + 1) / n - cdf(xs[i]);
    // Lower gap: just before x_i, F_n equals (first index of tie group)/n.
    const double left = cdf(std::nextafter(xs[i], -std::numeric_limits<double>::infinity()));
    const double lower = left - static_cast<double>(i) / n;
    d = std::max({d, upper, lower});
  }
  return std::clamp(d, 0.0, 1.0);
}

double ks_critical_value(double alpha, std::size_t n) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvariantViolation("alpha must lie in (0,1)");
  if (n == 0) throw EmptySample();
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  return c / std::sqrt(static_cast<double>(n));
}

FitFamily parse_fit_family(std::string_view text) {
  if (text == "exponential") return FitFamily::Exponential;
  if (text == "triangular") return FitFamily::Triangular;
  throw SchemaViolation("fit_family", "unknown family '" + std::string(text) + "'");
}

FitResult fit_or_empirical(std::span<const double> sample, FitFamily family, double alpha) {
  if (sample.size() < kMinFitSample) throw SampleTooSmall(sample.size(), kMinFitSample);

  const auto n = static_cast<double>(sample.size());
  const double mean = std::accumulate(sample.begin(), sample.end(), 0.0) / n;

  Distribution fitted;
  switch (family) {
    case FitFamily::Exponential:
      fitted = Distribution::exponential(mean > 0.0 ? mean : std::numeric_limits<double>::min());
      break;
    case FitFamily::Triangular: {
      // Support from the sample range; mode matches the first moment.
      const auto [lo, hi] = std::minmax_element(sample.begin(), sample.end());
      const double mode = std::clamp(3.0 * mean - *lo - *hi, *lo, *hi);
      fitted = Distribution::triangular(*lo, mode, *hi);
      break;
    }
  }

  FitResult result;
  result.fitted = fitted;
  result.statistic = ks_statistic(sample, [&](double x) { return fitted.cdf(x); });
  result.critical = ks_critical_value(alpha, sample.size());
  result.parametric = result.statistic <= result.critical;
  result.distribution = result.parametric ? fitted : Distribution::empirical(sample);
  return result;
}

void FitAuditLog::record(std::string phase, std::string urgency, const FitResult& result) {
  char buf[64];
  std::snprintf(buf, sizeof buf, ",%.6f,%.6f", result.statistic, result.critical);
  lines_.push_back(phase + "," + urgency + "," +
                   (result.parametric ? std::string(result.fitted.kind_name()) : "empirical") + buf);
}

void FitAuditLog::write(std::ostream& out) const {
  out << "phase,urgency,decision,D,critical\n";
  for (const auto& line : lines_) out << line << '\n';
}

}  // namespace emsim
