#include "fsmc/belief.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fsmc/error.hpp"

namespace fsmc {
namespace {

void check_pairing(Action action, Observation obs) {
  const bool deferred = action == Action::Defer;
  if (deferred != (obs == Observation::NoFeedback)) {
    throw Error(ErrorCode::InvalidObservation,
                deferred ? "ACK/NAK observed on a deferred slot"
                         : "transmission produced no ACK/NAK");
  }
}

// Writes the unnormalized Bayes correction into `out` and returns its mass.
double correct_raw(std::span<const double> b, const ChannelModel& model, Observation obs,
                   std::span<double> out) {
  double mass = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    double like = 1.0;
    if (obs == Observation::Ack) like = 1.0 - model.loss(i);
    if (obs == Observation::Nak) like = model.loss(i);
    out[i] = b[i] * like;
    mass += out[i];
  }
  return mass;
}

}  // namespace

Belief::Belief(std::vector<double> probs) : probs_(std::move(probs)) {
  double total = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0)) throw Error(ErrorCode::InvalidArgument, "belief entries must be >= 0");
    total += p;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::InvalidArgument, "belief has zero mass");
  for (double& p : probs_) p /= total;
}

Belief Belief::stationary(const ChannelModel& model) {
  const auto pi = model.stationary();
  return Belief({pi.begin(), pi.end()});
}

Belief Belief::point_mass(std::size_t n_states, std::size_t state) {
  std::vector<double> p(n_states, 0.0);
  p.at(state) = 1.0;
  return Belief(std::move(p));
}

double Belief::success_probability(const ChannelModel& model) const {
  double s = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) s += probs_[i] * (1.0 - model.loss(i));
  return s;
}

Belief correct(const Belief& b, const ChannelModel& model, Observation obs) {
  std::vector<double> out(b.size());
  const double mass = correct_raw(b.probs(), model, obs, out);
  if (!(mass > 0.0)) {
    throw Error(ErrorCode::DegenerateObservation, "observation has zero probability");
  }
  return Belief(std::move(out));
}

Belief predict(const Belief& b, const ChannelModel& model) {
  const std::size_t n = b.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = model.row(i);
    for (std::size_t j = 0; j < n; ++j) out[j] += b[i] * row[j];
  }
  return Belief(std::move(out));
}

Belief step(const Belief& b, const ChannelModel& model, Action action, Observation obs) {
  std::vector<double> out(b.size());
  step_into(b.probs(), model, action, obs, out);
  return Belief(std::move(out));
}

void step_into(std::span<const double> b, const ChannelModel& model, Action action,
               Observation obs, std::span<double> out) {
  check_pairing(action, obs);
  const std::size_t n = b.size();
  // Small fixed buffer; channels in this library have a handful of states.
  double local[16];
  std::vector<double> heap;
  std::span<double> corrected;
  if (n <= 16) {
    corrected = std::span<double>(local, n);
  } else {
    heap.resize(n);
    corrected = heap;
  }
  const double mass = correct_raw(b, model, obs, corrected);
  if (!(mass > 0.0)) {
    throw Error(ErrorCode::DegenerateObservation, "observation has zero probability");
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double ci = corrected[i] / mass;
    if (ci == 0.0) continue;
    const auto row = model.row(i);
    for (std::size_t j = 0; j < n; ++j) out[j] += ci * row[j];
  }
  double total = 0.0;
  for (double x : out) total += x;
  for (double& x : out) x /= total;
}

// ---------------------------------------------------------------------------
// SimplexLattice

SimplexLattice::SimplexLattice(std::size_t parts, std::size_t resolution)
    : parts_(parts), resolution_(resolution) {
  if (parts == 0) throw Error(ErrorCode::InvalidArgument, "lattice needs at least one part");
  if (resolution == 0) throw Error(ErrorCode::GridTooCoarse, "lattice resolution must be >= 1");
  // counts_[p][s] = number of compositions of s into p parts = C(s + p - 1, p - 1).
  counts_.assign((parts + 1) * (resolution + 1), 0);
  const auto cap = static_cast<std::uint64_t>(std::numeric_limits<std::uint32_t>::max());
  for (std::size_t s = 0; s <= resolution; ++s) counts_[1 * (resolution + 1) + s] = 1;
  counts_[0] = 1;
  for (std::size_t p = 2; p <= parts; ++p) {
    for (std::size_t s = 0; s <= resolution; ++s) {
      // Pascal: compositions of s into p parts = sum over the first part.
      std::uint64_t c = counts_[p * (resolution + 1) + (s == 0 ? 0 : s - 1)];
      if (s == 0) c = 1;
      else c += counts_[(p - 1) * (resolution + 1) + s];
      if (c > cap) throw Error(ErrorCode::InvalidArgument, "simplex lattice too large");
      counts_[p * (resolution + 1) + s] = c;
    }
  }
  size_ = static_cast<std::size_t>(count(parts, resolution));
}

std::uint64_t SimplexLattice::count(std::size_t parts, std::size_t total) const {
  return counts_[parts * (resolution_ + 1) + total];
}

std::size_t SimplexLattice::rank(std::span<const std::uint32_t> composition) const {
  std::size_t r = 0;
  std::size_t remaining = resolution_;
  for (std::size_t i = 0; i + 1 < parts_; ++i) {
    const std::size_t rest = parts_ - i - 1;
    for (std::uint32_t v = 0; v < composition[i]; ++v) r += count(rest, remaining - v);
    remaining -= composition[i];
  }
  return r;
}

std::vector<std::uint32_t> SimplexLattice::unrank(std::size_t index) const {
  if (index >= size_) throw Error(ErrorCode::OutOfBounds, "lattice index out of range");
  std::vector<std::uint32_t> c(parts_, 0);
  std::size_t remaining = resolution_;
  for (std::size_t i = 0; i + 1 < parts_; ++i) {
    const std::size_t rest = parts_ - i - 1;
    std::uint32_t v = 0;
    while (true) {
      const auto block = static_cast<std::size_t>(count(rest, remaining - v));
      if (index < block) break;
      index -= block;
      ++v;
    }
    c[i] = v;
    remaining -= v;
  }
  c[parts_ - 1] = static_cast<std::uint32_t>(remaining);
  return c;
}

Belief SimplexLattice::point(std::size_t index) const {
  const auto c = unrank(index);
  std::vector<double> p(parts_);
  for (std::size_t i = 0; i < parts_; ++i) p[i] = static_cast<double>(c[i]) / resolution_;
  return Belief(std::move(p));
}

std::size_t SimplexLattice::nearest(std::span<const double> probs) const {
  const auto m = static_cast<std::int64_t>(resolution_);
  std::vector<std::int64_t> c(parts_);
  std::vector<double> frac(parts_);
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < parts_; ++i) {
    const double x = std::clamp(probs[i], 0.0, 1.0) * static_cast<double>(m);
    c[i] = static_cast<std::int64_t>(std::floor(x));
    frac[i] = x - static_cast<double>(c[i]);
    assigned += c[i];
  }
  std::vector<std::size_t> order(parts_);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  std::int64_t remainder = m - assigned;
  for (std::size_t t = 0; remainder > 0; t = (t + 1) % parts_, --remainder) ++c[order[t]];
  // Only reachable when the input mass rounds above one: take units back from
  // the smallest fractional parts.
  for (std::size_t t = parts_; remainder < 0; ++remainder) {
    do { t = (t == 0 ? parts_ : t) - 1; } while (c[order[t]] == 0);
    --c[order[t]];
  }
  std::vector<std::uint32_t> comp(parts_);
  for (std::size_t i = 0; i < parts_; ++i) comp[i] = static_cast<std::uint32_t>(c[i]);
  return rank(comp);
}

void SimplexLattice::split(std::span<const double> probs, std::vector<Weighted>& out) const {
  out.clear();
  const std::size_t n = parts_;
  const double m = static_cast<double>(resolution_);
  if (n == 1) {
    out.push_back({0, 1.0});
    return;
  }
  // Cumulative coordinates y_i = m * sum_{j >= i} p_j, non-increasing in i with y_0 = m.
  std::vector<double> y(n + 1, 0.0);
  for (std::size_t i = n; i-- > 1;) y[i] = y[i + 1] + m * std::max(0.0, probs[i]);
  y[0] = m;
  std::vector<std::int64_t> base(n + 1, 0);
  std::vector<double> d(n, 0.0);
  base[0] = static_cast<std::int64_t>(resolution_);
  for (std::size_t i = 1; i < n; ++i) {
    y[i] = std::min(y[i], m);
    base[i] = static_cast<std::int64_t>(std::floor(y[i]));
    d[i] = y[i] - static_cast<double>(base[i]);
  }
  std::vector<std::size_t> order(n - 1);
  std::iota(order.begin(), order.end(), 1);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return d[a] > d[b]; });

  std::vector<std::uint32_t> comp(n);
  auto emit = [&](double weight) {
    if (weight <= 0.0) return;
    for (std::size_t i = 0; i < n; ++i) comp[i] = static_cast<std::uint32_t>(base[i] - base[i + 1]);
    const std::size_t idx = rank(comp);
    for (auto& w : out) {
      if (w.index == idx) {
        w.weight += weight;
        return;
      }
    }
    out.push_back({idx, weight});
  };

  emit(1.0 - d[order[0]]);
  for (std::size_t j = 0; j < order.size(); ++j) {
    ++base[order[j]];
    const double next = j + 1 < order.size() ? d[order[j + 1]] : 0.0;
    emit(d[order[j]] - next);
  }
}

// ---------------------------------------------------------------------------
// BeliefGrid

BeliefGrid::BeliefGrid(std::size_t n_states, std::size_t bins, QuantizerKind kind)
    : n_states_(n_states), bins_(bins), kind_(kind) {
  if (n_states == 0) throw Error(ErrorCode::InvalidArgument, "grid needs at least one state");
  if (bins < 2) throw Error(ErrorCode::GridTooCoarse, "belief grid needs at least 2 bins");
  if (n_states == 1) {
    size_ = 1;
  } else if (n_states == 2) {
    size_ = bins;
  } else {
    lattice_.emplace(n_states, bins);
    size_ = lattice_->size();
  }
}

std::size_t BeliefGrid::quantize(std::span<const double> probs) const {
  if (n_states_ == 1) return 0;
  if (n_states_ == 2) {
    const double x = std::clamp(probs[0], 0.0, 1.0) * static_cast<double>(bins_);
    return std::min(static_cast<std::size_t>(x), bins_ - 1);
  }
  return lattice_->nearest(probs);
}

Belief BeliefGrid::dequantize(std::size_t index) const {
  if (index >= size_) throw Error(ErrorCode::OutOfBounds, "belief index out of range");
  if (n_states_ == 1) return Belief({1.0});
  if (n_states_ == 2) {
    const double p0 = (static_cast<double>(index) + 0.5) / static_cast<double>(bins_);
    return Belief({p0, 1.0 - p0});
  }
  return lattice_->point(index);
}

std::size_t quantize(const Belief& b, std::size_t bins) {
  return BeliefGrid(b.size(), bins).quantize(b);
}

Belief dequantize(std::size_t index, std::size_t n_states, std::size_t bins) {
  return BeliefGrid(n_states, bins).dequantize(index);
}

}  // namespace fsmc
