#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "fsmc/config.hpp"
#include "fsmc/dp.hpp"

namespace fsmc {

/// Aggregate over all trials for one (scheduler, load) pair. NTC is mean
/// attempts per slot.
struct SchedulerMetrics {
  std::string scheduler;
  SchedulerKind kind = SchedulerKind::Blind;
  std::size_t w0 = 0;
  double target_throughput = 0.0;
  std::size_t trials = 0;
  double mean_attempts = 0.0;
  double se_attempts = 0.0;
  double mean_delivered = 0.0;
  double se_delivered = 0.0;
  double ntc = 0.0;
  double delivered_throughput = 0.0;
  std::size_t drop_trials = 0;
  std::uint64_t dropped_packets = 0;
};

struct RunMetrics {
  std::size_t horizon = 0;
  std::size_t schedulers = 0;
  /// Load-major: rows[l * n_schedulers + s].
  std::vector<SchedulerMetrics> rows;
  /// Per-trial attempts in the same row order, kept only on request. Useful
  /// for paired comparisons on coupled trajectories.
  std::vector<std::vector<std::uint32_t>> attempts;

  const SchedulerMetrics& at(std::size_t load, std::size_t scheduler) const;
};

/// Monte Carlo evaluation. Trial i draws one trajectory with seed
/// cfg.seed + i; every scheduler and every load is replayed on it. Results do
/// not depend on cfg.threads.
RunMetrics run(const ExperimentConfig& cfg, bool keep_samples = false);

void write_csv(std::ostream& out, const RunMetrics& metrics);
std::string summary_json(const ExperimentConfig& cfg, const RunMetrics& metrics);

/// Writes <out_dir>/run.csv and <out_dir>/run.json.
void write_artifacts(const ExperimentConfig& cfg, const RunMetrics& metrics);

/// Formats a double the way every CSV and JSON artifact does (%.10g).
std::string format_number(double x);

/// Runs fn(i) for i in [0, count) on up to `threads` workers, striding over
/// indices. Exceptions from workers are rethrown on the calling thread.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn);

}  // namespace fsmc

#include "fsmc/detail/parallel.hpp"
