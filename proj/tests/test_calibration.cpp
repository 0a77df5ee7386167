#include "emsim/calibration.hpp"
#include "emsim/error.hpp"
#include "emsim/rng.hpp"
#include "emsim/synth.hpp"
#include "oracles.hpp"
#include "tiny.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace emsim;
using emsim::testing::grid_search_alpha;
using emsim::testing::refined_grid_alpha;

namespace {

CalibrationObservation ob(double t_rs, double t_obs, std::string slot = "s") {
  return {TravelLeg::BaseToScene, std::move(slot), UrgencyClass::Urgent, t_rs, t_obs};
}

std::vector<CalibrationObservation> random_group(RngStream& g, std::size_t n) {
  std::vector<CalibrationObservation> v;
  for (std::size_t i = 0; i < n; ++i) {
    const double t_rs = 1.0 + 59.0 * g.uniform();
    v.push_back(ob(t_rs, t_rs * (0.3 + 2.2 * g.uniform())));
  }
  return v;
}

}  // namespace

TEST(FilterObservations, RemovesRatiosOutsideBounds) {
  const std::vector<CalibrationObservation> raw{ob(10, 71), ob(10, 9)};
  const auto r = filter_observations(raw, {0.2, 5.0});
  ASSERT_EQ(r.kept.size(), 1u);
  EXPECT_EQ(r.kept[0].t_obs, 9.0);
  ASSERT_EQ(r.removed.size(), 1u);
  EXPECT_EQ(r.removed[0].t_obs, 71.0);
}

TEST(FilterObservations, InBoundsListIsUnchanged) {
  const std::vector<CalibrationObservation> raw{ob(10, 2), ob(10, 9), ob(10, 50)};
  const auto r = filter_observations(raw, {0.2, 5.0});
  EXPECT_EQ(r.kept, raw);
  EXPECT_TRUE(r.removed.empty());
}

TEST(FilterObservations, MixedListKeepsSevenOfTen) {
  std::vector<CalibrationObservation> raw;
  const double ratios[10] = {0.1, 0.5, 1.0, 6.0, 1.2, 0.9, 5.5, 2.0, 3.0, 0.8};
  for (double r : ratios) raw.push_back(ob(10, 10 * r));
  const auto r = filter_observations(raw, {0.2, 5.0});
  EXPECT_EQ(r.kept.size(), 7u);
  ASSERT_EQ(r.removed.size(), 3u);
  EXPECT_DOUBLE_EQ(r.removed[0].t_obs, 1.0);
  EXPECT_DOUBLE_EQ(r.removed[1].t_obs, 60.0);
  EXPECT_DOUBLE_EQ(r.removed[2].t_obs, 55.0);
}

TEST(FilterObservations, BadBoundsThrow) {
  EXPECT_THROW(filter_observations({}, {2.0, 1.0}), InvariantViolation);
  EXPECT_THROW(filter_observations({}, {0.0, 1.0}), InvariantViolation);
}

TEST(EstimateAlpha, SingleObservationIsItsRatio) {
  const std::vector<CalibrationObservation> v{ob(10, 8)};
  EXPECT_DOUBLE_EQ(estimate_alpha(v), 0.8);
}

TEST(EstimateAlpha, CommonNominalGivesTheMedianRatio) {
  const std::vector<CalibrationObservation> v{ob(10, 8), ob(10, 9), ob(10, 14)};
  EXPECT_DOUBLE_EQ(estimate_alpha(v), 0.9);
  const auto grid = grid_search_alpha(v, 1e-5, 3.0);
  EXPECT_NEAR(grid.alpha, 0.9, 1e-5);
}

TEST(EstimateAlpha, EvenWeightTieTakesTheLowerBreakpoint) {
  const std::vector<CalibrationObservation> v{ob(10, 8), ob(10, 12)};
  EXPECT_DOUBLE_EQ(estimate_alpha(v), 0.8);
  EXPECT_DOUBLE_EQ(l1_objective(v, 0.8), l1_objective(v, 1.0));
}

TEST(EstimateAlpha, EmptyGroupThrows) {
  EXPECT_THROW(estimate_alpha(std::vector<CalibrationObservation>{}), EmptyObservations);
}

TEST(EstimateAlpha, MatchesDenseGridOnRandomInstances) {
  RngStream g(21, 0, "cal");
  for (int trial = 0; trial < 1000; ++trial) {
    const auto v = random_group(g, 1 + g.below(50));
    const double a = estimate_alpha(v);
    const auto grid = refined_grid_alpha(v);
    ASSERT_NEAR(a, grid.alpha, 1e-6) << trial;
    ASSERT_LE(l1_objective(v, a), grid.objective + 1e-9) << trial;
  }
}

TEST(EstimateAlpha, LocalMinimumCertificate) {
  RngStream g(22, 0, "cal");
  for (int trial = 0; trial < 200; ++trial) {
    const auto v = random_group(g, 1 + g.below(30));
    const double a = estimate_alpha(v);
    const double f = l1_objective(v, a);
    EXPECT_LE(f, l1_objective(v, a + 1e-4) + 1e-12);
    EXPECT_LE(f, l1_objective(v, a - 1e-4) + 1e-12);
  }
}

TEST(EstimateAlpha, ScaleEquivariant) {
  RngStream g(23, 0, "cal");
  for (int trial = 0; trial < 100; ++trial) {
    auto v = random_group(g, 2 + g.below(20));
    const double a = estimate_alpha(v);
    const double c = 0.5 + 2.0 * g.uniform();
    for (auto& o : v) o.t_obs *= c;
    EXPECT_NEAR(estimate_alpha(v), c * a, 1e-12 * c * a);
  }
}

TEST(EstimateAlpha, DuplicationInvariant) {
  RngStream g(24, 0, "cal");
  for (int trial = 0; trial < 100; ++trial) {
    auto v = random_group(g, 1 + g.below(20));
    const double a = estimate_alpha(v);
    auto twice = v;
    twice.insert(twice.end(), v.begin(), v.end());
    EXPECT_DOUBLE_EQ(estimate_alpha(twice), a);
  }
}

TEST(BuildTable, NoObservationsMeansAllDefaults) {
  const auto r = build_table({});
  EXPECT_TRUE(r.table.empty());
  EXPECT_EQ(r.table.alpha(TravelLeg::BaseToScene, "weekday_peak", UrgencyClass::Urgent), 1.0);
  EXPECT_EQ(r.table.alpha(TravelLeg::SceneToED, "anything", UrgencyClass::NonUrgent), 1.0);
}

TEST(BuildTable, UnderfilledGroupIsDefaultedAndReported) {
  std::vector<CalibrationObservation> v;
  for (int i = 0; i < 4; ++i) v.push_back(ob(10, 9, "thin"));
  for (int i = 0; i < 5; ++i) v.push_back(ob(10, 8, "full"));
  BuildTableOptions opt;
  opt.min_count = 5;
  const auto r = build_table(v, opt);
  EXPECT_DOUBLE_EQ(r.table.alpha(TravelLeg::BaseToScene, "full", UrgencyClass::Urgent), 0.8);
  EXPECT_EQ(r.table.alpha(TravelLeg::BaseToScene, "thin", UrgencyClass::Urgent), 1.0);
  ASSERT_EQ(r.defaulted.size(), 1u);
  EXPECT_EQ(r.defaulted[0].first.slot, "thin");
  EXPECT_EQ(r.defaulted[0].second, 4u);
}

TEST(BuildTable, RecoversCaseStudyShapedFactors) {
  // Observations generated exactly at the case-study factors: 5 slots x 2
  // legs x 2 urgencies, all within [0.867, 1.064].
  std::vector<CalibrationObservation> v;
  RngStream g(25, 0, "cal");
  for (std::size_t p = 0; p < rieti::kPeriods.size(); ++p) {
    const auto& f = rieti::kCorrection[p];
    const std::pair<TravelLeg, UrgencyClass> cols[4] = {{TravelLeg::BaseToScene, UrgencyClass::NonUrgent},
                                                        {TravelLeg::SceneToED, UrgencyClass::NonUrgent},
                                                        {TravelLeg::BaseToScene, UrgencyClass::Urgent},
                                                        {TravelLeg::SceneToED, UrgencyClass::Urgent}};
    for (int k = 0; k < 4; ++k) {
      for (int i = 0; i < 9; ++i) {
        const double t = 5.0 + 40.0 * g.uniform();
        v.push_back({cols[k].first, std::string(rieti::kPeriods[p]), cols[k].second, t, f[k] * t});
      }
    }
  }
  BuildTableOptions opt;
  opt.slot_ids.assign(rieti::kPeriods.begin(), rieti::kPeriods.end());
  const auto r = build_table(v, opt);
  EXPECT_EQ(r.table.entries().size(), 20u);
  EXPECT_EQ(r.groups_total, 20u);
  EXPECT_TRUE(r.defaulted.empty());
  double lo = 10, hi = 0;
  for (const auto& [k, e] : r.table.entries()) {
    lo = std::min(lo, e.alpha);
    hi = std::max(hi, e.alpha);
  }
  EXPECT_NEAR(lo, 0.867, 1e-12);
  EXPECT_NEAR(hi, 1.064, 1e-12);
  EXPECT_NEAR(r.table.alpha(TravelLeg::BaseToScene, "weekday_peak", UrgencyClass::Urgent), 0.867, 1e-12);
}

namespace {

TravelTimeModel two_point_model(double alpha, double delta) {
  NetworkModel net({{"B", PointKind::Base, 0, 0, ""}, {"S", PointKind::DemandSquare, 1, 1, ""}});
  CalibrationTable table;
  if (alpha != 1.0) table.set({TravelLeg::BaseToScene, "weekday_peak", UrgencyClass::Urgent}, {alpha, 1});
  std::array<double, kLegCount> d{};
  d[index_of(TravelLeg::BaseToScene)] = delta;
  return TravelTimeModel(net, {{"B", "S", TravelLeg::BaseToScene, 20.0}, {"S", "B", TravelLeg::ReturnToBase, 12.0}},
                         table, d, five_period_week_scheme());
}

}  // namespace

TEST(TravelTime, DefaultTableIsNominal) {
  const auto m = two_point_model(1.0, 0.0);
  EXPECT_EQ(m.travel_time("S", "B", TravelLeg::ReturnToBase, "weekday_peak", UrgencyClass::Urgent, nullptr), 12.0);
  EXPECT_EQ(m.travel_time("B", "S", TravelLeg::BaseToScene, "weekend_night", UrgencyClass::NonUrgent, nullptr), 20.0);
}

TEST(TravelTime, CalibratedPeakUrgentBaseToScene) {
  const auto m = two_point_model(0.867, 0.0);
  EXPECT_NEAR(m.travel_time("B", "S", TravelLeg::BaseToScene, "weekday_peak", UrgencyClass::Urgent, nullptr), 17.34,
              1e-12);
  // Monday 08:00 falls in the weekday peak.
  EXPECT_NEAR(m.calibrated(0, 1, TravelLeg::BaseToScene, 480.0, UrgencyClass::Urgent), 17.34, 1e-12);
}

TEST(TravelTime, NoiseStaysWithinTriangularSupport) {
  const auto m = two_point_model(0.867, 4.0);
  RngStream s(26, 0, "noise");
  for (int i = 0; i < 10000; ++i) {
    const double t = m.travel_time("B", "S", TravelLeg::BaseToScene, "weekday_peak", UrgencyClass::Urgent, &s);
    ASSERT_GE(t, 13.34 - 1e-12);
    ASSERT_LE(t, 21.34 + 1e-12);
  }
  // Legs ending at a base stay deterministic.
  EXPECT_EQ(m.travel_time("S", "B", TravelLeg::ReturnToBase, "weekday_peak", UrgencyClass::Urgent, &s), 12.0);
}

TEST(TravelTime, UnknownPairThrows) {
  const auto m = two_point_model(1.0, 0.0);
  EXPECT_THROW(m.travel_time("S", "B", TravelLeg::SceneToED, "weekday_peak", UrgencyClass::Urgent, nullptr),
               UnknownPair);
}
