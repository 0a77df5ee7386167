#pragma once

#include "emsim/rng.hpp"

#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace emsim {

struct ConstantDist {
  double value = 0.0;  ///< may be +inf ("never")
  bool operator==(const ConstantDist&) const = default;
};

struct ExponentialDist {
  double mean = 1.0;
  bool operator==(const ExponentialDist&) const = default;
};

struct TriangularDist {
  double low = 0.0;
  double mode = 0.0;
  double high = 0.0;
  bool operator==(const TriangularDist&) const = default;
};

/// Observed values; sampling resamples them with replacement.
struct EmpiricalDist {
  std::vector<double> values;  ///< sorted ascending, nonempty
  bool operator==(const EmpiricalDist&) const = default;
};

/// An immutable, validated duration distribution (minutes).
class Distribution {
 public:
  using Kind = std::variant<ConstantDist, ExponentialDist, TriangularDist, EmpiricalDist>;

  Distribution() : Distribution(ConstantDist{0.0}, false) {}

  // Factories validate their arguments and throw InvariantViolation.
  static Distribution constant(double value, bool truncate_at_zero = false);
  static Distribution never();
  static Distribution exponential(double mean, bool truncate_at_zero = false);
  static Distribution triangular(double low, double mode, double high, bool truncate_at_zero = false);
  /// Values are copied and sorted.
  static Distribution empirical(std::span<const double> values, bool truncate_at_zero = false);

  double sample(RngStream& stream) const { return quantile(stream.uniform()); }
  /// Inverse-transform of u in [0,1), with truncation applied.
  double quantile(double u) const;
  /// Distribution function of the untruncated law.
  double cdf(double x) const;
  double mean() const;

  const Kind& kind() const noexcept { return kind_; }
  bool truncate_at_zero() const noexcept { return truncate_at_zero_; }
  std::string_view kind_name() const noexcept;
  bool is_never() const noexcept;

  bool operator==(const Distribution&) const = default;

 private:
  Distribution(Kind kind, bool truncate);

  Kind kind_;
  bool truncate_at_zero_ = false;
};

inline double sample(const Distribution& dist, RngStream& stream) { return dist.sample(stream); }

/// Draw from Triangular(t - delta, t, t + delta), negatives clamped to zero.
double sample_triangular_travel(double t, double delta, RngStream& stream);
/// Inverse-transform form of sample_triangular_travel for a given u in [0,1).
double triangular_travel_quantile(double t, double delta, double u);

}  // namespace emsim
