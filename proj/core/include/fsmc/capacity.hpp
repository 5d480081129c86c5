#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "fsmc/channel.hpp"

namespace fsmc {

/// Information available to the transmitter when the bound is computed.
enum class Grade : std::uint8_t {
  PerfectCSI,      // current state known before each decision
  DelayedCSI,      // previous slot's state fed back (causal CSI feedback)
  AckNakFeedback,  // only ACK/NAK outcomes
  Blind,           // nothing
};

std::string_view to_string(Grade grade) noexcept;

struct CurvePoint {
  double budget;  // attempts per slot
  double rate;    // delivered packets per slot
};

/// Capacity-cost curve in packet units: throughput achievable under an average
/// attempt budget. Piecewise linear between points, flat past the last point.
class CapacityCurve {
 public:
  CapacityCurve(Grade grade, std::vector<CurvePoint> points);

  Grade grade() const noexcept { return grade_; }
  std::span<const CurvePoint> points() const noexcept { return points_; }

  double rate_at(double budget) const;
  double max_rate() const noexcept { return points_.back().rate; }

  /// Cost-capacity function: the smallest budget whose rate reaches `rate`.
  /// Throws RateUnachievable above max_rate().
  double cost_for(double rate) const;

 private:
  Grade grade_;
  std::vector<CurvePoint> points_;
};

/// n + 1 evenly spaced budgets on [0, 1].
std::vector<double> uniform_budget_grid(std::size_t intervals);

/// Greedy allocation: spend the budget on states in decreasing order of
/// success probability. Knees sit at cumulative stationary masses and are
/// added to the grid as exact breakpoints.
CapacityCurve capacity_perfect_csi(const ChannelModel& model, std::span<const double> grid);

/// Budgets at which the perfect-CSI curve's slope drops.
std::vector<double> perfect_csi_knees(const ChannelModel& model);

/// Same greedy allocation over the previous slot's state, whose success
/// probability for the current slot is sum_j p_ij (1 - eps_j).
CapacityCurve capacity_delayed_csi(const ChannelModel& model, std::span<const double> grid);

/// rate = budget * sum_i pi_i (1 - eps_i).
CapacityCurve capacity_blind(const ChannelModel& model, std::span<const double> grid);

enum class FeedbackMode : std::uint8_t {
  ObserveAlways,      // an ACK/NAK outcome is revealed every slot
  ObserveOnTransmit,  // only transmitted slots produce feedback
};

struct AckNakBoundOptions {
  /// Lattice resolution over the filtered posterior.
  std::size_t belief_bins = 128;
  double tol = 1e-9;
  FeedbackMode feedback = FeedbackMode::ObserveAlways;
  std::size_t max_sweeps = 100000;
};

/// Numeric ACK/NAK bound: best long-run throughput under an average attempt
/// budget, over stationary policies of the constrained belief MDP.
///
/// The MDP state is the filtered posterior of the last slot's channel state on
/// a simplex lattice; the belief the transmitter acts on is that posterior
/// pushed through P. Successor posteriors are split over the vertices of their
/// lattice cell with barycentric weights, which preserves the mean belief and
/// never gives the controller less information than the exact filter. The
/// Lagrangian reward b.(1 - eps) - lambda is maximized by relative value
/// iteration, and the upper concave envelope is traced by searching lambda at
/// the slopes between hull vertices.
///
/// This is a numeric surrogate for the closed-form bound, not that bound.
CapacityCurve capacity_acknak(const ChannelModel& model, std::span<const double> grid,
                              const AckNakBoundOptions& options = {});

/// max over `rates` of 10 log10(cost_A(R) / cost_B(R)), with B the
/// better-informed grade.
double power_penalty(const CapacityCurve& worse, const CapacityCurve& better,
                     std::span<const double> rates);

/// 10 log10(attempts / reference_attempts). Throws ZeroReference.
double realized_penalty(double attempts, double reference_attempts);

struct PenaltyReport {
  double a_db = 0.0;
  double l_db = 0.0;
  double throughput = 0.0;
};

}  // namespace fsmc
