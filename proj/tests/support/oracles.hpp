#pragma once

#include "emsim/calibration.hpp"
#include "emsim/engine.hpp"

#include <map>
#include <span>
#include <string>

namespace emsim::testing {

struct GridMin {
  double alpha = 0.0;
  double objective = 0.0;
};

/// Minimiser of sum |alpha * t_rs - t_obs| over a uniform grid on
/// [step, hi], lowest alpha on ties.
GridMin grid_search_alpha(std::span<const CalibrationObservation> obs, double step, double hi);

/// Coarse-to-fine grid search (1e-3, then 1e-6, then 1e-9 around the best
/// point). Exact for convex objectives up to the final step.
GridMin refined_grid_alpha(std::span<const CalibrationObservation> obs, double hi = 3.0);

/// Coverage recomputed from raw records: arrival >= warmup, terminal, not
/// cancelled, response time present, classified by the triage tag.
double brute_coverage(std::span<const MissionRecord> records, UrgencyClass urgency, double threshold,
                      double warmup, std::size_t* n = nullptr);

/// Percentage of measured assigned calls per home base.
std::map<std::string, double> brute_base_shares(std::span<const MissionRecord> records, double warmup);

/// Two-sided 97.5% Student-t quantiles from printed tables, 10 significant digits.
double tabled_t975(std::size_t df);

}  // namespace emsim::testing
