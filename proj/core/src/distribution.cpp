#include "emsim/distribution.hpp"

#include "emsim/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace emsim {

namespace {

double triangular_quantile(const TriangularDist& t, double u) {
  const double width = t.high - t.low;
  if (width <= 0.0) return t.mode;
  const double split = (t.mode - t.low) / width;
  if (u < split) return t.low + std::sqrt(u * width * (t.mode - t.low));
  return t.high - std::sqrt((1.0 - u) * width * (t.high - t.mode));
}

double triangular_cdf(const TriangularDist& t, double x) {
  if (x <= t.low) return x < t.low ? 0.0 : (t.high == t.low ? 1.0 : 0.0);
  if (x >= t.high) return 1.0;
  const double width = t.high - t.low;
  if (x <= t.mode) return (x - t.low) * (x - t.low) / (width * (t.mode - t.low));
  return 1.0 - (t.high - x) * (t.high - x) / (width * (t.high - t.mode));
}

}  // namespace

Distribution::Distribution(Kind kind, bool truncate)
    : kind_(std::move(kind)), truncate_at_zero_(truncate) {}

Distribution Distribution::constant(double value, bool truncate_at_zero) {
  if (std::isnan(value)) throw InvariantViolation("constant distribution value is NaN");
  return Distribution(ConstantDist{value}, truncate_at_zero);
}

Distribution Distribution::never() {
  return constant(std::numeric_limits<double>::infinity());
}

Distribution Distribution::exponential(double mean, bool truncate_at_zero) {
  if (!(mean > 0.0) || !std::isfinite(mean)) {
    throw InvariantViolation("exponential mean must be positive and finite");
  }
  return Distribution(ExponentialDist{mean}, truncate_at_zero);
}

Distribution Distribution::triangular(double low, double mode, double high, bool truncate_at_zero) {
  if (!(low <= mode && mode <= high) || !std::isfinite(low) || !std::isfinite(high)) {
    throw InvariantViolation("triangular requires finite low <= mode <= high");
  }
  return Distribution(TriangularDist{low, mode, high}, truncate_at_zero);
}

Distribution Distribution::empirical(std::span<const double> values, bool truncate_at_zero) {
  if (values.empty()) throw InvariantViolation("empirical distribution needs at least one value");
  std::vector<double> sorted(values.begin(), values.end());
  for (double v : sorted) {
    if (!std::isfinite(v)) throw InvariantViolation("empirical sample contains a non-finite value");
  }
  std::sort(sorted.begin(), sorted.end());
  return Distribution(EmpiricalDist{std::move(sorted)}, truncate_at_zero);
}

double Distribution::quantile(double u) const {
  double v = std::visit(
      [u](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ConstantDist>) {
          return d.value;
        } else if constexpr (std::is_same_v<T, ExponentialDist>) {
          return -d.mean * std::log1p(-u);
        } else if constexpr (std::is_same_v<T, TriangularDist>) {
          return triangular_quantile(d, u);
        } else {
          const auto n = d.values.size();
          auto idx = static_cast<std::size_t>(u * static_cast<double>(n));
          return d.values[std::min(idx, n - 1)];
        }
      },
      kind_);
  if (truncate_at_zero_ && v < 0.0) v = 0.0;
  return v;
}

double Distribution::cdf(double x) const {
  return std::visit(
      [x](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ConstantDist>) {
          return x >= d.value ? 1.0 : 0.0;
        } else if constexpr (std::is_same_v<T, ExponentialDist>) {
          return x <= 0.0 ? 0.0 : -std::expm1(-x / d.mean);
        } else if constexpr (std::is_same_v<T, TriangularDist>) {
          return triangular_cdf(d, x);
        } else {
          auto it = std::upper_bound(d.values.begin(), d.values.end(), x);
          return static_cast<double>(it - d.values.begin()) / static_cast<double>(d.values.size());
        }
      },
      kind_);
}

double Distribution::mean() const {
  return std::visit(
      [](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ConstantDist>) {
          return d.value;
        } else if constexpr (std::is_same_v<T, ExponentialDist>) {
          return d.mean;
        } else if constexpr (std::is_same_v<T, TriangularDist>) {
          return (d.low + d.mode + d.high) / 3.0;
        } else {
          return std::accumulate(d.values.begin(), d.values.end(), 0.0) /
                 static_cast<double>(d.values.size());
        }
      },
      kind_);
}

std::string_view Distribution::kind_name() const noexcept {
  switch (kind_.index()) {
    case 0: return "constant";
    case 1: return "exponential";
    case 2: return "triangular";
    default: return "empirical";
  }
}

bool Distribution::is_never() const noexcept {
  const auto* c = std::get_if<ConstantDist>(&kind_);
  return c != nullptr && std::isinf(c->value) && c->value > 0.0;
}

double sample_triangular_travel(double t, double delta, RngStream& stream) {
  if (delta <= 0.0) return std::max(t, 0.0);
  return triangular_travel_quantile(t, delta, stream.uniform());
}

double triangular_travel_quantile(double t, double delta, double u) {
  if (delta <= 0.0) return std::max(t, 0.0);
  const double v = triangular_quantile(TriangularDist{t - delta, t, t + delta}, u);
  return std::max(v, 0.0);
}

}  // namespace emsim
