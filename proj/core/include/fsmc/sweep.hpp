#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fsmc/channel.hpp"
#include "fsmc/config.hpp"

namespace fsmc {

/// Two-state channel with memory mu = 1 - p12 - p21 and stationary mass pi1
/// on state 0. Throws InfeasibleMu when a transition probability leaves
/// [0, 1] or the chain would be frozen (mu >= 1).
ChannelModel channel_from_memory(double mu, double pi1, double loss1, double loss2);

/// Which quantity the cases of a sweep share.
///  Stationary: pi1 = sweep.pi1[0]; one case per loss pair.
///  LossProbs:  loss = sweep.loss_pairs[0]; one case per pi1.
enum class HoldQuantity { Stationary, LossProbs };

struct SweepRow {
  double pi1 = 0.0;
  double loss1 = 0.0;
  double loss2 = 0.0;
  double mu = 0.0;
  double p12 = 0.0;
  double p21 = 0.0;
  /// Power penalties against the delayed-CSI curve (state fed back one slot
  /// late) and against the perfect-CSI curve.
  double a_db_acknak = 0.0;
  double a_db_blind = 0.0;
  double a_db_acknak_perfect = 0.0;
  double a_db_blind_perfect = 0.0;
  /// Realized penalties against the causal-CSI scheduler; NaN when the sweep
  /// does not simulate.
  double l_db_acknak = 0.0;
  double l_db_blind = 0.0;
  double ntc_causal = 0.0;
  double ntc_acknak = 0.0;
  double ntc_blind = 0.0;
};

/// Penalty table over channel memory. Capacity curves use base.capacity;
/// simulations use base's horizon, terminal cost, trials, seed and threads at
/// load round(sweep.throughput * horizon), with the first AckNak scheduler's
/// belief_bins (256 if none is configured).
std::vector<SweepRow> memory_sweep(const ExperimentConfig& base, std::span<const double> mu_values,
                                   HoldQuantity hold);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace fsmc
