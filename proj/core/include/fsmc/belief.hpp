#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fsmc/channel.hpp"

namespace fsmc {

enum class Action : std::uint8_t { Defer = 0, Transmit = 1 };

/// NoFeedback is the only legal observation after a Defer.
enum class Observation : std::uint8_t { Ack, Nak, NoFeedback };

/// Posterior over the hidden channel state, renormalized after every update.
class Belief {
 public:
  Belief() = default;
  explicit Belief(std::vector<double> probs);

  static Belief stationary(const ChannelModel& model);
  static Belief point_mass(std::size_t n_states, std::size_t state);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const noexcept { return probs_; }

  /// Probability that a transmission in the slot this belief describes succeeds.
  double success_probability(const ChannelModel& model) const;

  friend bool operator==(const Belief&, const Belief&) = default;

 private:
  std::vector<double> probs_;
};

/// Bayes correction on the current slot's feedback. Throws
/// DegenerateObservation when the evidence has zero probability.
Belief correct(const Belief& b, const ChannelModel& model, Observation obs);

/// Markov prediction one slot ahead: b * P.
Belief predict(const Belief& b, const ChannelModel& model);

/// Correct-then-predict: the belief used to decide the next slot.
Belief step(const Belief& b, const ChannelModel& model, Action action, Observation obs);

/// Allocation-free variant of step() for simulation loops. `out` must have
/// n_states entries and may not alias `b`.
void step_into(std::span<const double> b, const ChannelModel& model, Action action,
               Observation obs, std::span<double> out);

/// Grid of compositions of `resolution` into `parts` non-negative integers,
/// i.e. the points c / resolution of the probability simplex, ranked in
/// lexicographic order of the composition.
class SimplexLattice {
 public:
  SimplexLattice(std::size_t parts, std::size_t resolution);

  std::size_t parts() const noexcept { return parts_; }
  std::size_t resolution() const noexcept { return resolution_; }
  std::size_t size() const noexcept { return size_; }

  std::size_t rank(std::span<const std::uint32_t> composition) const;
  std::vector<std::uint32_t> unrank(std::size_t index) const;
  Belief point(std::size_t index) const;

  /// L1-nearest lattice point (largest-remainder rounding).
  std::size_t nearest(std::span<const double> probs) const;

  struct Weighted {
    std::size_t index;
    double weight;
  };

  /// Barycentric weights of `probs` over the vertices of its cell in the
  /// Freudenthal triangulation. Weights are non-negative, sum to one, and the
  /// weighted mean of the vertices reproduces `probs`.
  void split(std::span<const double> probs, std::vector<Weighted>& out) const;

 private:
  std::uint64_t count(std::size_t parts, std::size_t total) const;

  std::size_t parts_;
  std::size_t resolution_;
  std::size_t size_;
  std::vector<std::uint64_t> counts_;  // (parts + 1) x (resolution + 1)
};

enum class QuantizerKind : std::uint8_t { Uniform = 0 };

/// Quantizer used by the table-based schedulers.
///
/// Two states: `bins` uniform cells on the probability of state 0, dequantized
/// to cell centers. More states: the SimplexLattice of resolution `bins`,
/// nearest point in L1, with C(bins + n - 1, n - 1) indices.
class BeliefGrid {
 public:
  BeliefGrid(std::size_t n_states, std::size_t bins, QuantizerKind kind = QuantizerKind::Uniform);

  std::size_t n_states() const noexcept { return n_states_; }
  std::size_t bins() const noexcept { return bins_; }
  std::size_t size() const noexcept { return size_; }
  QuantizerKind kind() const noexcept { return kind_; }

  std::size_t quantize(std::span<const double> probs) const;
  std::size_t quantize(const Belief& b) const { return quantize(b.probs()); }
  Belief dequantize(std::size_t index) const;

 private:
  std::size_t n_states_;
  std::size_t bins_;
  std::size_t size_;
  QuantizerKind kind_;
  std::optional<SimplexLattice> lattice_;  // n > 2 only
};

std::size_t quantize(const Belief& b, std::size_t bins);
Belief dequantize(std::size_t index, std::size_t n_states, std::size_t bins);

}  // namespace fsmc
