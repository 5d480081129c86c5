#include <gtest/gtest.h>

#include <random>

#include "fsmc/dp.hpp"
#include "fsmc/error.hpp"
#include "support.hpp"

namespace fsmc {
namespace {

DPConfig small(std::size_t T, std::size_t W, double C, bool keep = false) {
  DPConfig cfg;
  cfg.horizon = T;
  cfg.max_packets = W;
  cfg.terminal_cost = C;
  cfg.keep_values = keep;
  return cfg;
}

TEST(CausalDP, OneStepHandExamples) {
  const auto m = build_channel({{0.8, 0.2}, {0.1, 0.9}}, {0.2, 0.95});
  const auto p = solve_causal_csi(m, small(1, 1, 10.0));
  EXPECT_EQ(p.action(0, 1, 0), Action::Transmit);
  EXPECT_DOUBLE_EQ(p.initial_value(1, 0), 3.0);
  EXPECT_EQ(p.action(0, 1, 1), Action::Defer);
  EXPECT_DOUBLE_EQ(p.initial_value(1, 1), 10.0);
}

TEST(CausalDP, EmptyQueueDefersAtZeroCost) {
  const auto m = test::reference_3smc();
  const auto p = solve_causal_csi(m, small(20, 5, 50.0));
  for (std::size_t k = 0; k < 20; ++k) {
    for (std::size_t s = 0; s < 3; ++s) EXPECT_EQ(p.action(k, 0, s), Action::Defer);
  }
  for (std::size_t s = 0; s < 3; ++s) EXPECT_EQ(p.initial_value(0, s), 0.0);
}

TEST(CausalDP, TiesGoToDefer) {
  // eps = 1 - 1/C makes transmit and defer cost the same in the last slot.
  const auto m = build_channel({{0.5, 0.5}, {0.5, 0.5}}, {0.9, 0.9});
  const auto p = solve_causal_csi(m, small(1, 1, 10.0));
  EXPECT_EQ(p.action(0, 1, 0), Action::Defer);
}

TEST(CausalDP, ValuesMonotone) {
  const auto m = test::reference_2smc();
  const auto p = solve_causal_csi(m, small(30, 6, 50.0, true));
  for (std::size_t k = 0; k <= 30; ++k) {
    for (std::size_t s = 0; s < 2; ++s) {
      for (std::size_t w = 1; w <= 6; ++w) {
        EXPECT_LE(p.value(k, w - 1, s), p.value(k, w, s) + 1e-12);
        // More remaining time never costs more.
        if (k > 0) {
          EXPECT_LE(p.value(k - 1, w, s), p.value(k, w, s) + 1e-12);
        }
      }
    }
  }
}

TEST(CausalDP, MatchesLiteralPolicyEnumeration) {
  std::mt19937_64 gen(17);
  for (int c = 0; c < 10; ++c) {
    const auto m = test::random_channel(gen, 2);
    const auto chain = test::to_chain(m);
    for (auto [T, w0] : {std::pair{1, 3}, {2, 3}, {3, 2}, {4, 2}, {6, 1}}) {
      const auto p = solve_causal_csi(m, small(T, 3, 20.0));
      EXPECT_NEAR(p.expected_cost(m, w0), oracle::causal_enumeration_cost(chain, T, w0, 20.0), 1e-9)
          << "T=" << T << " w0=" << w0;
    }
  }
}

TEST(CausalDP, MatchesHistoryTreeBothTimings) {
  std::mt19937_64 gen(23);
  for (int c = 0; c < 5; ++c) {
    const auto m = test::random_channel(gen, 2 + c % 2);
    const auto chain = test::to_chain(m);
    for (std::size_t T : {1u, 3u, 5u}) {
      for (std::size_t w0 : {1u, 2u}) {
        const auto cur = solve_causal_csi(m, small(T, 2, 15.0), CsiTiming::Current);
        const auto del = solve_causal_csi(m, small(T, 2, 15.0), CsiTiming::Delayed);
        EXPECT_NEAR(cur.expected_cost(m, w0), oracle::causal_tree_cost(chain, T, w0, 15.0, false), 1e-9);
        EXPECT_NEAR(del.expected_cost(m, w0), oracle::causal_tree_cost(chain, T, w0, 15.0, true), 1e-9);
        EXPECT_LE(cur.expected_cost(m, w0), del.expected_cost(m, w0) + 1e-12);
      }
    }
  }
}

TEST(CausalDP, LookupsOutsideTheTableThrow) {
  const auto p = solve_causal_csi(test::reference_2smc(), small(5, 2, 10.0));
  EXPECT_THROW(p.action(5, 1, 0), Error);
  EXPECT_THROW(p.action(0, 3, 0), Error);
  EXPECT_THROW(p.action(0, 1, 2), Error);
}

TEST(Config, InvalidDPConfigRejected) {
  DPConfig cfg = small(0, 1, 1.0);
  EXPECT_THROW(validate(cfg), Error);
  cfg = small(3, 1, -1.0);
  EXPECT_THROW(validate(cfg), Error);
  cfg = small(3, 1, 1.0);
  cfg.initial_packets = 2;
  EXPECT_THROW(validate(cfg), Error);
}

TEST(AckNakDP, OneStepHandExample) {
  const auto m = test::reference_2smc();
  const auto p = solve_acknak(m, small(1, 1, 10.0), 16);
  // Index 8 of 16 is the cell holding (0.5, 0.5); its center is 0.53125.
  const double ps = 0.53125 * 0.8 + 0.46875 * 0.2;
  EXPECT_EQ(p.action(0, 1, 8), Action::Transmit);
  EXPECT_NEAR(p.initial_value(1, 8), 1.0 + (1.0 - ps) * 10.0, 1e-12);
}

TEST(AckNakDP, EqualLossGivesBeliefIndependentActions) {
  const auto m = build_channel({{0.7, 0.3}, {0.4, 0.6}}, {0.35, 0.35});
  const auto p = solve_acknak(m, small(40, 8, 50.0), 32);
  for (std::size_t k = 0; k < 40; ++k) {
    for (std::size_t w = 0; w <= 8; ++w) {
      for (std::size_t i = 1; i < p.info_size(); ++i) EXPECT_EQ(p.action(k, w, i), p.action(k, w, 0));
    }
  }
}

TEST(AckNakDP, TooCoarseGrid) {
  try {
    solve_acknak(test::reference_2smc(), small(2, 1, 10.0), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::GridTooCoarse);
  }
}

TEST(AckNakDP, FineGridMatchesExactBeliefTree) {
  const auto m = test::reference_2smc();
  const auto chain = test::to_chain(m);
  const auto pi = m.stationary();
  const std::vector<double> b0(pi.begin(), pi.end());
  const auto p = solve_acknak(m, small(2, 1, 200.0), 65536);
  EXPECT_NEAR(p.expected_cost(m, 1), oracle::acknak_tree_cost(chain, 2, 1, 200.0, b0), 1e-3);
}

TEST(AckNakDP, StateKnowledgeNeverCostsMore) {
  const auto m = test::reference_2smc();
  const auto chain = test::to_chain(m);
  const auto pi = m.stationary();
  const double exact = oracle::acknak_tree_cost(chain, 6, 2, 30.0, {pi[0], pi[1]});
  const auto causal = solve_causal_csi(m, small(6, 2, 30.0));
  EXPECT_LE(causal.expected_cost(m, 2), exact + 1e-12);
}

TEST(Blind, TransmitsIffQueued) {
  const auto p = blind_policy();
  EXPECT_EQ(p.action(1234, 5, 0), Action::Transmit);
  EXPECT_EQ(p.action(0, 0, 0), Action::Defer);
}

TEST(NonCausal, AllGoodTrajectory) {
  const auto m = build_channel({{1.0}}, {0.0});
  DPConfig cfg = small(5, 3, 10.0);
  cfg.initial_packets = 3;
  const auto traj = sample_trajectory(m, 5, 1);
  const auto r = solve_noncausal(m, cfg, traj);
  EXPECT_EQ(r.attempts, 3u);
  EXPECT_EQ(r.delivered, 3u);
  EXPECT_DOUBLE_EQ(r.expected_cost, 3.0);
}

TEST(NonCausal, TransmitsInTheGoodSlot) {
  const auto m = build_channel({{0.5, 0.5}, {0.5, 0.5}}, {0.2, 0.8});
  Trajectory traj{{0, 1}, {0.5, 0.5}, 0};
  DPConfig cfg = small(2, 1, 10.0);
  cfg.initial_packets = 1;
  const auto r = solve_noncausal(m, cfg, traj);
  EXPECT_NEAR(r.expected_cost, 1.0 + 0.2 * 9.0, 1e-12);
  EXPECT_EQ(r.attempts, 1u);
  EXPECT_EQ(r.delivered, 1u);
}

TEST(NonCausal, EmptyQueueAndHorizonMismatch) {
  const auto m = test::reference_2smc();
  const auto traj = sample_trajectory(m, 10, 3);
  DPConfig cfg = small(10, 4, 10.0);
  const auto r = solve_noncausal(m, cfg, traj);
  EXPECT_EQ(r.attempts, 0u);
  cfg.horizon = 11;
  try {
    solve_noncausal(m, cfg, traj);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::HorizonMismatch);
  }
}

TEST(NonCausal, MatchesTreeOnRandomTrajectories) {
  std::mt19937_64 gen(5);
  for (int t = 0; t < 20; ++t) {
    const auto m = test::random_channel(gen, 3);
    const auto traj = sample_trajectory(m, 7, gen());
    std::vector<double> eps;
    for (auto s : traj.states) eps.push_back(m.loss(s));
    DPConfig cfg = small(7, 3, 25.0);
    cfg.initial_packets = 3;
    EXPECT_NEAR(solve_noncausal(m, cfg, traj).expected_cost, oracle::noncausal_tree_cost(eps, 3, 25.0), 1e-9);
  }
}

}  // namespace
}  // namespace fsmc
