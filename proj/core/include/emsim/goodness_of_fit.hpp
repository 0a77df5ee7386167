#pragma once

#include "emsim/distribution.hpp"

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace emsim {

/// Kolmogorov-Smirnov distance sup_x |F_n(x) - F(x)| between the empirical
/// CDF of `sample` and `cdf`. Both one-sided gaps are evaluated at every
/// sample point, using the left limit of `cdf` for the lower gap so that
/// distributions with atoms are handled exactly. Throws EmptySample.
double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf);

/// Asymptotic critical value c(alpha) / sqrt(n), c(alpha) = sqrt(-ln(alpha/2) / 2).
/// c(0.05) = 1.3581.
double ks_critical_value(double alpha, std::size_t n);

enum class FitFamily { Exponential, Triangular };

FitFamily parse_fit_family(std::string_view text);

struct FitResult {
  Distribution distribution;  ///< the adopted distribution
  Distribution fitted;        ///< the moment-fitted candidate
  bool parametric = false;    ///< true when the candidate was accepted
  double statistic = 0.0;     ///< KS distance to the fitted candidate
  double critical = 0.0;
};

inline constexpr std::size_t kMinFitSample = 5;

/// Fits `family` by the method of moments and keeps it unless the KS test
/// rejects at level `alpha`, in which case the empirical distribution of the
/// sample is adopted. Throws SampleTooSmall below 5 observations.
FitResult fit_or_empirical(std::span<const double> sample, FitFamily family, double alpha = 0.05);

/// Text audit trail of fit decisions, one "phase,urgency,decision,D,critical"
/// line per call to record().
class FitAuditLog {
 public:
  void record(std::string phase, std::string urgency, const FitResult& result);
  void write(std::ostream& out) const;
  const std::vector<std::string>& lines() const noexcept { return lines_; }

 private:
  std::vector<std::string> lines_;
};

}  // namespace emsim
