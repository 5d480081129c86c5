#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "fsmc/error.hpp"
#include "fsmc/simulate.hpp"
#include "fsmc/table.hpp"
#include "support.hpp"

namespace fsmc {
namespace {

Policy acknak(const ChannelModel& m, std::size_t T, std::size_t W, std::size_t bins) {
  DPConfig cfg;
  cfg.horizon = T;
  cfg.max_packets = W;
  cfg.terminal_cost = 50.0;
  return solve_acknak(m, cfg, bins);
}

TEST(TableSpec, PayloadArithmetic) {
  TableSpec big{256, 20, 100, 500, TableLayout::SlotQueueHistoryLevel};
  EXPECT_EQ(big.payload_bytes(), 32000000u);
  TableSpec small{16, 10, 100, 500, TableLayout::SlotQueueHistoryLevel};
  EXPECT_EQ(small.payload_bytes(), 1000000u);
  TableSpec exact{4, 0, 4, 4, TableLayout::SlotQueueBelief};
  EXPECT_EQ(exact.payload_bits(), 80u);
  TableSpec quantized{64, 10, 100, 500, TableLayout::SlotQueueBelief};
  EXPECT_EQ(quantized.payload_bits(), 500u * 10u * 64u);
}

TEST(Table, SmallExactTableRoundTrip) {
  const auto m = test::reference_2smc();
  const auto p = acknak(m, 4, 4, 4);
  const auto t = compile_table(p, {4, 0, 4, 4, TableLayout::SlotQueueBelief}, m);
  EXPECT_EQ(t.payload().size(), 10u);
  EXPECT_EQ(t.file_size(), 74u);
  for (std::size_t k = 0; k < 4; ++k) {
    for (std::size_t w = 0; w <= 4; ++w) {
      for (std::size_t b = 0; b < 4; ++b) EXPECT_EQ(t.lookup(k, w, b), p.action(k, w, b));
    }
  }
  std::stringstream buf;
  t.write(buf);
  EXPECT_EQ(buf.str().size(), t.file_size());
  const auto back = PolicyTable::read(buf);
  EXPECT_EQ(back, t);
}

TEST(Table, EmptyQueueAlwaysDefers) {
  const auto m = test::reference_2smc();
  const auto p = acknak(m, 30, 20, 64);
  for (const TableSpec& spec : {TableSpec{64, 0, 20, 30, TableLayout::SlotQueueBelief},
                                TableSpec{16, 5, 20, 30, TableLayout::SlotQueueBelief}}) {
    const auto t = compile_table(p, spec, m);
    for (std::size_t k = 0; k < 30; ++k) {
      for (std::size_t b = 0; b < spec.belief_bins; ++b) EXPECT_EQ(t.lookup(k, 0, b), Action::Defer);
    }
  }
  const auto h = compile_table(p, {8, 4, 20, 30, TableLayout::SlotQueueHistoryLevel}, m);
  EXPECT_EQ(h.lookup(3, 0, 5, 2), Action::Defer);
}

TEST(Table, QueueCells) {
  const auto m = test::reference_2smc();
  const auto t = compile_table(acknak(m, 5, 100, 16), {16, 10, 100, 5, TableLayout::SlotQueueBelief}, m);
  EXPECT_EQ(t.queue_cells(), 10u);
  EXPECT_EQ(t.queue_cell(1), 0u);
  EXPECT_EQ(t.queue_cell(10), 0u);
  EXPECT_EQ(t.queue_cell(11), 1u);
  EXPECT_EQ(t.queue_cell(100), 9u);
  EXPECT_THROW(t.queue_cell(0), Error);
  EXPECT_THROW(t.queue_cell(101), Error);
}

TEST(Table, OutOfBoundsLookups) {
  const auto m = test::reference_2smc();
  const auto t = compile_table(acknak(m, 4, 4, 4), {4, 0, 4, 4, TableLayout::SlotQueueBelief}, m);
  for (auto fn : {+[](const PolicyTable& x) { x.lookup(4, 1, 0); },
                  +[](const PolicyTable& x) { x.lookup(0, 5, 0); },
                  +[](const PolicyTable& x) { x.lookup(0, 1, 4); }}) {
    try {
      fn(t);
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::OutOfBounds);
    }
  }
  EXPECT_THROW(t.lookup(0, 1, 0, 0), Error);
}

TEST(Table, CompileRejectsOversizedSpecs) {
  const auto m = test::reference_2smc();
  const auto p = acknak(m, 10, 5, 16);
  EXPECT_THROW(compile_table(p, {16, 0, 6, 10, TableLayout::SlotQueueBelief}, m), Error);
  EXPECT_THROW(compile_table(p, {16, 0, 5, 11, TableLayout::SlotQueueBelief}, m), Error);
  EXPECT_THROW(compile_table(p, {32, 0, 5, 10, TableLayout::SlotQueueBelief}, m), Error);
  EXPECT_THROW(compile_table(p, {12, 4, 5, 10, TableLayout::SlotQueueHistoryLevel}, m), Error);
  const auto causal = solve_causal_csi(m, DPConfig{10, 0, 5, 50.0, false});
  EXPECT_THROW(compile_table(causal, {2, 0, 5, 10, TableLayout::SlotQueueBelief}, m), Error);
}

TEST(Table, ShorterHorizonReadsTheTailOfThePolicy) {
  const auto m = test::reference_2smc();
  const auto p = acknak(m, 20, 6, 16);
  const auto t = compile_table(p, {16, 0, 6, 8, TableLayout::SlotQueueBelief}, m);
  for (std::size_t k = 0; k < 8; ++k) {
    for (std::size_t w = 0; w <= 6; ++w) {
      for (std::size_t b = 0; b < 16; ++b) EXPECT_EQ(t.lookup(k, w, b), p.action(k + 12, w, b));
    }
  }
}

TEST(Table, HistoryLayoutMatchesSourcePolicy) {
  const auto m = test::reference_2smc();
  const auto p = acknak(m, 6, 5, 512);
  const auto t = compile_table(p, {8, 4, 5, 6, TableLayout::SlotQueueHistoryLevel}, m);
  EXPECT_EQ(t.payload().size(), (6u * 5u * 8u * 4u + 7u) / 8u);
  const BeliefGrid levels(2, 4);
  for (std::size_t h = 0; h < 8; ++h) {
    for (std::size_t l = 0; l < 4; ++l) {
      Belief b = levels.dequantize(l);
      for (int j = 2; j >= 0; --j) {
        b = step(b, m, Action::Transmit, ((h >> j) & 1u) ? Observation::Ack : Observation::Nak);
      }
      const auto idx = p.grid()->quantize(b);
      for (std::size_t k = 0; k < 6; ++k) {
        for (std::size_t w = 1; w <= 5; ++w) EXPECT_EQ(t.lookup(k, w, h, l), p.action(k, w, idx));
      }
    }
  }
}

TEST(Table, ReadRejectsCorruptFiles) {
  const auto m = test::reference_2smc();
  const auto t = compile_table(acknak(m, 4, 4, 4), {4, 0, 4, 4, TableLayout::SlotQueueBelief}, m);
  std::stringstream buf;
  t.write(buf);
  const std::string good = buf.str();
  auto expect_bad = [](std::string bytes) {
    std::stringstream in(bytes);
    try {
      PolicyTable::read(in);
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::BadTableFile);
    }
  };
  std::string bad_magic = good;
  bad_magic[0] = 'X';
  expect_bad(bad_magic);
  expect_bad(good.substr(0, 40));
  expect_bad(good.substr(0, good.size() - 1));
  expect_bad(good + "x");
  std::string bad_version = good;
  bad_version[8] = 2;
  expect_bad(bad_version);
}

TEST(Table, SaveLoadFile) {
  const auto m = test::reference_3smc();
  const auto t = compile_table(acknak(m, 10, 5, 6), {28, 3, 5, 10, TableLayout::SlotQueueBelief}, m);
  const auto path = std::filesystem::temp_directory_path() / "fsmc_table_test.bin";
  t.save(path);
  EXPECT_EQ(std::filesystem::file_size(path), t.file_size());
  EXPECT_EQ(PolicyTable::load(path), t);
  std::filesystem::remove(path);
}

TEST(Table, FingerprintTracksChannel) {
  const auto a = channel_fingerprint(test::reference_2smc());
  EXPECT_EQ(a, channel_fingerprint(test::reference_2smc()));
  EXPECT_NE(a, channel_fingerprint(build_channel({{0.8, 0.2}, {0.1, 0.9}}, {0.2, 0.81})));
}

TEST(Table, DenseTableReplaysLikeThePolicy) {
  const auto m = test::reference_2smc();
  const auto p = acknak(m, 60, 12, 64);
  const auto dense = compile_dense(p, m);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto traj = sample_trajectory(m, 60, seed);
    const auto a = run_policy(p, m, traj, 12);
    const auto b = run_table(dense, m, traj, 12);
    EXPECT_EQ(a.attempts, b.attempts);
    EXPECT_EQ(a.delivered, b.delivered);
  }
}

TEST(Table, CausalDenseTableReplaysLikeThePolicy) {
  const auto m = test::reference_3smc();
  for (auto timing : {CsiTiming::Current, CsiTiming::Delayed}) {
    const auto p = solve_causal_csi(m, DPConfig{40, 0, 8, 50.0, false}, timing);
    const auto dense = compile_dense(p, m);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto traj = sample_trajectory(m, 40, seed);
      const auto a = run_policy(p, m, traj, 8);
      const auto b = run_table(dense, m, traj, 8);
      EXPECT_EQ(a.attempts, b.attempts);
      EXPECT_EQ(a.delivered, b.delivered);
    }
  }
}

TEST(Table, ReplayRejectsForeignChannel) {
  const auto m = test::reference_2smc();
  const auto dense = compile_dense(acknak(m, 10, 2, 8), m);
  const auto other = build_channel({{0.5, 0.5}, {0.5, 0.5}}, {0.2, 0.8});
  EXPECT_THROW(run_table(dense, other, sample_trajectory(other, 10, 1), 2), Error);
  EXPECT_THROW(run_table(dense, m, sample_trajectory(m, 11, 1), 2), Error);
}

}  // namespace
}  // namespace fsmc
