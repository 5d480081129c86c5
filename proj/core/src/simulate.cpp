#include "fsmc/simulate.hpp"

#include <string>
#include <vector>

#include "fsmc/error.hpp"

namespace fsmc {
namespace {

void check_horizon(std::size_t expected, const Trajectory& traj) {
  if (traj.horizon() != expected) {
    throw Error(ErrorCode::HorizonMismatch, "trajectory has " + std::to_string(traj.horizon()) +
                                                " slots, scheduler expects " +
                                                std::to_string(expected));
  }
}

// Shared loop; `decide(k, w, belief)` returns the action for slot k. The
// belief is only maintained when `track_belief` is set.
template <typename Decide>
Outcome replay(const ChannelModel& model, const Trajectory& traj, std::size_t w0,
               bool track_belief, Decide&& decide) {
  Outcome out;
  std::size_t w = w0;
  const auto pi = model.stationary();
  std::vector<double> belief(pi.begin(), pi.end()), next(pi.size());
  for (std::size_t k = 0; k < traj.horizon() && w > 0; ++k) {
    const Action a = decide(k, w, std::span<const double>(belief));
    Observation obs = Observation::NoFeedback;
    if (a == Action::Transmit) {
      ++out.attempts;
      if (traj.transmission_fails(model, k)) {
        obs = Observation::Nak;
      } else {
        obs = Observation::Ack;
        ++out.delivered;
        --w;
      }
    }
    if (track_belief) {
      step_into(belief, model, a, obs, next);
      std::swap(belief, next);
    }
  }
  return out;
}

}  // namespace

Outcome run_policy(const Policy& policy, const ChannelModel& model, const Trajectory& traj,
                   std::size_t w0) {
  switch (policy.kind()) {
    case SchedulerKind::Blind:
      return replay(model, traj, w0, false,
                    [](std::size_t, std::size_t, std::span<const double>) { return Action::Transmit; });
    case SchedulerKind::CausalCSI: {
      check_horizon(policy.horizon(), traj);
      const bool delayed = policy.timing() == CsiTiming::Delayed;
      const std::size_t unknown = model.n_states();
      return replay(model, traj, w0, false, [&](std::size_t k, std::size_t w, std::span<const double>) {
        const std::size_t info = delayed ? (k == 0 ? unknown : traj.states[k - 1]) : traj.states[k];
        return policy.action(k, w, info);
      });
    }
    case SchedulerKind::AckNak: {
      check_horizon(policy.horizon(), traj);
      const BeliefGrid& grid = *policy.grid();
      return replay(model, traj, w0, true, [&](std::size_t k, std::size_t w, std::span<const double> b) {
        return policy.action(k, w, grid.quantize(b));
      });
    }
    case SchedulerKind::NonCausalCSI:
      break;
  }
  throw Error(ErrorCode::InvalidArgument, "non-causal scheduling has no stored policy");
}

Outcome run_noncausal(const ChannelModel& model, const Trajectory& traj, std::size_t w0,
                      double terminal_cost) {
  DPConfig cfg;
  cfg.horizon = traj.horizon();
  cfg.initial_packets = w0;
  cfg.max_packets = w0;
  cfg.terminal_cost = terminal_cost;
  const auto r = solve_noncausal(model, cfg, traj);
  return {static_cast<std::uint32_t>(r.attempts), static_cast<std::uint32_t>(r.delivered)};
}

Outcome run_table(const PolicyTable& table, const ChannelModel& model, const Trajectory& traj,
                  std::size_t w0) {
  const auto& spec = table.spec();
  if (spec.layout != TableLayout::SlotQueueBelief) {
    throw Error(ErrorCode::DimensionMismatch, "only slot/queue/belief tables can be replayed");
  }
  if (table.header().fingerprint != channel_fingerprint(model)) {
    throw Error(ErrorCode::DimensionMismatch, "table was compiled for a different channel");
  }
  check_horizon(spec.horizon, traj);
  if (w0 > spec.max_packets) throw Error(ErrorCode::OutOfBounds, "w0 exceeds table max_packets");

  switch (table.header().quantizer) {
    case TableQuantizer::UniformBelief: {
      const BeliefGrid grid = table.belief_grid();
      return replay(model, traj, w0, true, [&](std::size_t k, std::size_t w, std::span<const double> b) {
        return table.lookup(k, w, grid.quantize(b));
      });
    }
    case TableQuantizer::ChannelState:
      return replay(model, traj, w0, false, [&](std::size_t k, std::size_t w, std::span<const double>) {
        return table.lookup(k, w, traj.states[k]);
      });
    case TableQuantizer::DelayedState: {
      const std::size_t unknown = model.n_states();
      return replay(model, traj, w0, false, [&](std::size_t k, std::size_t w, std::span<const double>) {
        return table.lookup(k, w, k == 0 ? unknown : traj.states[k - 1]);
      });
    }
  }
  throw Error(ErrorCode::BadTableFile, "unknown quantizer");
}

}  // namespace fsmc
