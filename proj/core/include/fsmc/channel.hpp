#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace fsmc {

/// Finite-state Markov channel: a row-stochastic transition matrix over the
/// hidden channel states plus a packet-loss probability per state.
///
/// States are 0-based throughout the library. Instances are immutable once
/// built and may be shared freely between threads.
class ChannelModel {
 public:
  std::size_t n_states() const noexcept { return loss_.size(); }

  /// p_ij, probability of moving from state i to state j in one slot.
  double transition(std::size_t i, std::size_t j) const { return transition_[i * n_states() + j]; }
  std::span<const double> row(std::size_t i) const {
    return {transition_.data() + i * n_states(), n_states()};
  }
  std::span<const double> transition_matrix() const noexcept { return transition_; }

  double loss(std::size_t i) const { return loss_[i]; }
  std::span<const double> loss() const noexcept { return loss_; }

  std::span<const double> stationary() const noexcept { return stationary_; }

  /// 1 - p12 - p21 for two-state channels, empty otherwise.
  std::optional<double> memory() const noexcept { return memory_; }

  /// Long-run success probability of a transmission made without any
  /// knowledge of the state: sum_i pi_i (1 - eps_i).
  double mean_success() const noexcept;

 private:
  friend ChannelModel build_channel(std::vector<std::vector<double>> transition,
                                    std::vector<double> loss);

  ChannelModel() = default;

  std::vector<double> transition_;  // row-major n x n
  std::vector<double> loss_;
  std::vector<double> stationary_;
  std::optional<double> memory_;
};

/// Validates and builds a channel. Throws fsmc::Error with RowNotStochastic,
/// LossOutOfRange, Reducible, Periodic or DimensionMismatch.
ChannelModel build_channel(std::vector<std::vector<double>> transition, std::vector<double> loss);

/// Convenience for the common two-state (Gilbert-Elliott style) case.
ChannelModel two_state_channel(double p12, double p21, double loss1, double loss2);

struct StationaryInfo {
  std::vector<double> pi;
  std::optional<double> memory;
};

StationaryInfo stationary_and_memory(const ChannelModel& model);

/// One realization of the hidden state process together with pre-drawn loss
/// variables. A transmission in slot k fails iff loss_draws[k] < eps(states[k]);
/// the draw is only consumed by schedulers that transmit in slot k, so every
/// scheduler evaluated on the same trajectory sees the same randomness.
struct Trajectory {
  std::vector<std::uint16_t> states;
  std::vector<double> loss_draws;
  std::uint64_t seed = 0;

  std::size_t horizon() const noexcept { return states.size(); }
  bool transmission_fails(const ChannelModel& model, std::size_t k) const {
    return loss_draws[k] < model.loss(states[k]);
  }
};

/// Deterministic in (model, horizon, seed). The initial state is drawn from
/// the stationary distribution.
Trajectory sample_trajectory(const ChannelModel& model, std::size_t horizon, std::uint64_t seed);

}  // namespace fsmc
