#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "fsmc/belief.hpp"
#include "fsmc/channel.hpp"

namespace fsmc {

/// Grades of channel side information available to a scheduler.
enum class SchedulerKind : std::uint8_t { NonCausalCSI, CausalCSI, AckNak, Blind };

std::string_view to_string(SchedulerKind kind) noexcept;
SchedulerKind scheduler_kind_from_string(std::string_view name);

/// When the causal-CSI scheduler learns the channel state: before deciding in
/// the same slot (Current) or one slot late, through feedback (Delayed).
enum class CsiTiming : std::uint8_t { Current, Delayed };

/// Finite-horizon transmission control problem. One unit of cost is one
/// transmission attempt; each packet still queued after the last slot costs
/// `terminal_cost`. Tables are solved for every backlog 0..max_packets so a
/// single solve serves every load.
struct DPConfig {
  std::size_t horizon = 500;
  std::size_t initial_packets = 0;
  std::size_t max_packets = 100;
  double terminal_cost = 50.0;
  /// Keep the full value table (T + 1 layers). V_0 is always kept.
  bool keep_values = false;
};

void validate(const DPConfig& cfg);

/// Transmit/defer decision table indexed by (slot, backlog, information index).
///
/// The information index is the channel state for CausalCSI (plus one extra
/// "prior" index for the Delayed timing at slot 0), the quantized belief for
/// AckNak, and is ignored for Blind. Policies are immutable after solving.
class Policy {
 public:
  SchedulerKind kind() const noexcept { return kind_; }
  CsiTiming timing() const noexcept { return timing_; }
  std::size_t horizon() const noexcept { return horizon_; }
  std::size_t max_packets() const noexcept { return max_packets_; }
  std::size_t info_size() const noexcept { return info_size_; }
  double terminal_cost() const noexcept { return terminal_cost_; }

  /// Quantizer for AckNak policies; null otherwise.
  const BeliefGrid* grid() const noexcept { return grid_ ? &*grid_ : nullptr; }

  Action action(std::size_t k, std::size_t w, std::size_t info) const;

  bool has_values() const noexcept { return !values_.empty(); }
  /// Cost-to-go V_k(w, info), k in [0, horizon]. Requires keep_values.
  double value(std::size_t k, std::size_t w, std::size_t info) const;
  double initial_value(std::size_t w, std::size_t info) const;

  /// Expected cost from slot 0 with `w` packets and the channel in steady state.
  double expected_cost(const ChannelModel& model, std::size_t w) const;

 private:
  friend Policy solve_causal_csi(const ChannelModel&, const DPConfig&, CsiTiming);
  friend Policy solve_acknak(const ChannelModel&, const DPConfig&, std::size_t);
  friend Policy blind_policy();

  std::size_t cell(std::size_t k, std::size_t w, std::size_t info) const {
    return (k * (max_packets_ + 1) + w) * info_size_ + info;
  }

  SchedulerKind kind_ = SchedulerKind::Blind;
  CsiTiming timing_ = CsiTiming::Current;
  std::size_t horizon_ = 0;
  std::size_t max_packets_ = 0;
  std::size_t info_size_ = 1;
  double terminal_cost_ = 0.0;
  std::optional<BeliefGrid> grid_;
  std::vector<std::uint8_t> actions_;
  std::vector<double> initial_values_;  // V_0, (max_packets + 1) x info_size
  std::vector<double> values_;          // optional, (horizon + 1) layers
};

/// Backward induction over (slot, backlog, channel state).
Policy solve_causal_csi(const ChannelModel& model, const DPConfig& cfg,
                        CsiTiming timing = CsiTiming::Current);

/// Backward induction over (slot, backlog, belief-grid point); successor
/// beliefs are quantized to the grid before the value lookup.
Policy solve_acknak(const ChannelModel& model, const DPConfig& cfg, std::size_t belief_bins);

/// Transmit whenever the queue is non-empty. Valid for any horizon.
Policy blind_policy();

struct NonCausalResult {
  std::size_t attempts = 0;
  std::size_t delivered = 0;
  /// V_0(initial_packets) given the known state sequence.
  double expected_cost = 0.0;
};

/// Scheduler that knows the whole state sequence of `traj` in advance (but
/// not the loss draws). Solves the per-realization DP, then replays it on the
/// trajectory's loss draws starting from cfg.initial_packets.
NonCausalResult solve_noncausal(const ChannelModel& model, const DPConfig& cfg,
                                const Trajectory& traj);

}  // namespace fsmc
