#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fsmc/capacity.hpp"
#include "fsmc/channel.hpp"
#include "fsmc/dp.hpp"

namespace fsmc {

struct ChannelSpec {
  std::vector<std::vector<double>> transition{{0.8, 0.2}, {0.1, 0.9}};
  std::vector<double> loss{0.2, 0.8};
};

ChannelModel build_channel(const ChannelSpec& spec);

/// Packed-table variant of an AckNak scheduler.
struct TableOptions {
  std::uint32_t belief_bins = 64;
  std::uint32_t w_levels = 10;
};

struct SchedulerSpec {
  std::string name;  // CSV label; defaults to the kind name
  SchedulerKind kind = SchedulerKind::Blind;
  CsiTiming timing = CsiTiming::Current;
  std::size_t belief_bins = 256;
  std::optional<TableOptions> table;
};

struct CapacitySpec {
  std::size_t intervals = 100;
  std::size_t belief_bins = 128;
  FeedbackMode feedback = FeedbackMode::ObserveAlways;
  double tol = 1e-9;
};

/// Two-state penalty sweeps. Every (pi1, loss pair) case is evaluated at
/// every memory value.
struct SweepSpec {
  std::vector<double> mu{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95};
  std::vector<double> pi1;
  std::vector<std::array<double, 2>> loss_pairs;
  double throughput = 0.2;
  std::size_t rate_points = 25;
  bool simulate = true;
};

struct ExperimentConfig {
  ChannelSpec channel;
  std::vector<SchedulerSpec> schedulers;
  std::size_t horizon = 500;
  std::size_t max_packets = 100;
  double terminal_cost = 50.0;
  /// Either explicit queue loads or throughput targets d (w0 = round(d T)).
  std::vector<std::size_t> packets;
  std::vector<double> throughputs;
  std::size_t trials = 10000;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  std::filesystem::path out_dir = "out";
  CapacitySpec capacity;
  SweepSpec sweep;

  /// Queue loads after resolving throughput targets, in config order.
  std::vector<std::size_t> loads() const;
};

/// Full-scale defaults: the reference two-state channel, all four
/// schedulers, loads d in {0.05, 0.1, 0.2}.
ExperimentConfig default_config();

/// Parses a JSON config on top of `base` (default_config() unless given).
/// Unknown keys and bad values raise ConfigInvalid naming the offending field.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig parse_config(std::string_view json_text, ExperimentConfig base);
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base);

void validate(const ExperimentConfig& cfg);

/// Fully resolved config as pretty-printed JSON.
std::string to_json_string(const ExperimentConfig& cfg);

}  // namespace fsmc
