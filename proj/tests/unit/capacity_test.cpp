#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fsmc/capacity.hpp"
#include "fsmc/error.hpp"
#include "support.hpp"

namespace fsmc {
namespace {

void expect_valid_curve(const CapacityCurve& c) {
  const auto pts = c.points();
  ASSERT_GE(pts.size(), 2u);
  EXPECT_EQ(pts.front().budget, 0.0);
  EXPECT_NEAR(pts.front().rate, 0.0, 1e-12);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_LE(pts[i].rate, pts[i].budget + 1e-12);
    if (i > 0) {
      EXPECT_GT(pts[i].budget, pts[i - 1].budget);
      EXPECT_GE(pts[i].rate, pts[i - 1].rate - 1e-12);
    }
    if (i > 0 && i + 1 < pts.size()) {
      const double left = (pts[i].rate - pts[i - 1].rate) / (pts[i].budget - pts[i - 1].budget);
      const double right = (pts[i + 1].rate - pts[i].rate) / (pts[i + 1].budget - pts[i].budget);
      EXPECT_GE(left, right - 1e-7) << to_string(c.grade()) << " at " << pts[i].budget;
    }
  }
}

TEST(Capacity, PerfectCsiKneeTwoState) {
  const auto m = test::reference_2smc();
  const auto knees = perfect_csi_knees(m);
  ASSERT_EQ(knees.size(), 1u);
  EXPECT_NEAR(knees[0], 1.0 / 3.0, 1e-12);
  const auto grid = uniform_budget_grid(100);
  const auto c = capacity_perfect_csi(m, grid);
  EXPECT_NEAR(c.rate_at(1.0 / 3.0), 0.8 / 3.0, 1e-12);
  EXPECT_NEAR(c.rate_at(0.1), 0.08, 1e-12);
  EXPECT_NEAR(c.rate_at(0.5) - c.rate_at(0.4), 0.02, 1e-12);
  EXPECT_NEAR(c.rate_at(1.0), 0.4, 1e-12);
}

TEST(Capacity, PerfectCsiKneesThreeState) {
  const auto m = test::reference_3smc();
  const auto knees = perfect_csi_knees(m);
  ASSERT_EQ(knees.size(), 2u);
  const auto pi = m.stationary();
  EXPECT_EQ(knees[0], pi[0]);
  EXPECT_EQ(knees[1], pi[0] + pi[1]);
  EXPECT_NEAR(knees[0], 0.372, 1e-3);
  EXPECT_NEAR(knees[1], 0.605, 1e-3);
}

TEST(Capacity, BlindIsALine) {
  const auto grid = uniform_budget_grid(20);
  const auto c = capacity_blind(test::reference_2smc(), grid);
  for (double p : grid) EXPECT_NEAR(c.rate_at(p), 0.4 * p, 1e-12);
  const auto lossless = capacity_blind(build_channel({{0.5, 0.5}, {0.2, 0.8}}, {0.0, 0.0}), grid);
  for (double p : grid) EXPECT_NEAR(lossless.rate_at(p), p, 1e-12);
  const auto useless = capacity_blind(build_channel({{0.5, 0.5}, {0.2, 0.8}}, {1.0, 1.0}), grid);
  for (double p : grid) EXPECT_EQ(useless.rate_at(p), 0.0);
}

TEST(Capacity, AckNakOnMemorylessChannelEqualsBlind) {
  const auto grid = uniform_budget_grid(50);
  for (const auto& m : {build_channel({{1.0 / 3, 2.0 / 3}, {1.0 / 3, 2.0 / 3}}, {0.1, 0.9}),
                        build_channel({{0.2, 0.5, 0.3}, {0.2, 0.5, 0.3}, {0.2, 0.5, 0.3}},
                                      {0.0, 0.5, 1.0})}) {
    const auto acknak = capacity_acknak(m, grid, {32, 1e-10});
    const auto blind = capacity_blind(m, grid);
    for (double p : grid) EXPECT_NEAR(acknak.rate_at(p), blind.rate_at(p), 1e-6) << p;
  }
}

TEST(Capacity, ZeroBudgetZeroRate) {
  const std::vector<double> grid{0.0, 0.5, 1.0};
  EXPECT_EQ(capacity_acknak(test::reference_2smc(), grid).rate_at(0.0), 0.0);
}

TEST(Capacity, CurvesAreValidAndOrdered) {
  std::mt19937_64 gen(31);
  std::vector<ChannelModel> models{test::reference_2smc(), test::reference_3smc()};
  for (int i = 0; i < 6; ++i) models.push_back(test::random_channel(gen, 2 + i % 2));
  const auto grid = uniform_budget_grid(40);
  for (const auto& m : models) {
    const auto perfect = capacity_perfect_csi(m, grid);
    const auto delayed = capacity_delayed_csi(m, grid);
    const auto acknak = capacity_acknak(m, grid, {m.n_states() == 2 ? 128u : 24u, 1e-9});
    const auto blind = capacity_blind(m, grid);
    for (const auto* c : {&perfect, &delayed, &acknak, &blind}) expect_valid_curve(*c);
    for (double p : grid) {
      EXPECT_LE(blind.rate_at(p), acknak.rate_at(p) + 1e-9);
      EXPECT_LE(acknak.rate_at(p), delayed.rate_at(p) + 1e-9);
      EXPECT_LE(delayed.rate_at(p), perfect.rate_at(p) + 1e-12);
    }
    EXPECT_NEAR(acknak.rate_at(1.0), m.mean_success(), 1e-9);
  }
}

TEST(Capacity, AckNakFeedbackModes) {
  const auto m = build_channel({{0.9, 0.1}, {0.05, 0.95}}, {0.0, 1.0});
  const auto grid = uniform_budget_grid(20);
  const auto always = capacity_acknak(m, grid, {64, 1e-9, FeedbackMode::ObserveAlways});
  const auto gated = capacity_acknak(m, grid, {64, 1e-9, FeedbackMode::ObserveOnTransmit});
  const auto blind = capacity_blind(m, grid);
  for (double p : grid) {
    EXPECT_LE(gated.rate_at(p), always.rate_at(p) + 1e-9);
    EXPECT_LE(blind.rate_at(p), gated.rate_at(p) + 1e-9);
  }
  EXPECT_GT(always.rate_at(0.3), blind.rate_at(0.3) + 0.05);
}

TEST(Capacity, CurveInversion) {
  const CapacityCurve c(Grade::Blind, {{0.0, 0.0}, {0.5, 0.4}, {1.0, 0.5}});
  EXPECT_NEAR(c.cost_for(0.2), 0.25, 1e-12);
  EXPECT_NEAR(c.cost_for(0.45), 0.75, 1e-12);
  EXPECT_NEAR(c.cost_for(0.5), 1.0, 1e-12);
  try {
    c.cost_for(0.51);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RateUnachievable);
  }
}

TEST(Penalty, PowerPenalty) {
  const auto m = test::reference_2smc();
  const auto grid = uniform_budget_grid(100);
  const auto perfect = capacity_perfect_csi(m, grid);
  const std::vector<double> rates{0.05, 0.1, 0.2};
  EXPECT_NEAR(power_penalty(perfect, perfect, rates), 0.0, 1e-12);
  const auto blind = capacity_blind(m, grid);
  // At R = 0.05 the perfect-CSI scheme spends 0.0625, blind spends 0.125.
  EXPECT_NEAR(power_penalty(blind, perfect, std::vector<double>{0.05}), 10.0 * std::log10(2.0), 1e-9);
  EXPECT_THROW(power_penalty(blind, perfect, std::vector<double>{0.41}), Error);
}

TEST(Penalty, RealizedPenalty) {
  EXPECT_DOUBLE_EQ(realized_penalty(5.0, 5.0), 0.0);
  EXPECT_NEAR(realized_penalty(2.0, 1.0), 3.0103, 1e-4);
  try {
    realized_penalty(1.0, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroReference);
  }
}

}  // namespace
}  // namespace fsmc
