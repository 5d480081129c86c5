#pragma once

#include <cstddef>
#include <cstdint>

#include "fsmc/channel.hpp"
#include "fsmc/dp.hpp"
#include "fsmc/table.hpp"

namespace fsmc {

struct Outcome {
  std::uint32_t attempts = 0;
  std::uint32_t delivered = 0;
};

/// Replays a solved (or blind) policy on one trajectory starting with w0
/// queued packets. AckNak policies track the exact belief and look it up
/// through the policy's grid.
Outcome run_policy(const Policy& policy, const ChannelModel& model, const Trajectory& traj,
                   std::size_t w0);

/// Per-trajectory non-causal scheduler.
Outcome run_noncausal(const ChannelModel& model, const Trajectory& traj, std::size_t w0,
                      double terminal_cost);

/// Replays a packed SlotQueueBelief table (belief- or state-indexed). The
/// table horizon must equal the trajectory's.
Outcome run_table(const PolicyTable& table, const ChannelModel& model, const Trajectory& traj,
                  std::size_t w0);

}  // namespace fsmc
