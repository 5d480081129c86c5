#include "fsmc/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fsmc/belief.hpp"
#include "fsmc/error.hpp"

namespace fsmc {
namespace {

std::vector<std::size_t> order_by_success(std::span<const double> success) {
  std::vector<std::size_t> order(success.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return success[a] > success[b]; });
  return order;
}

double greedy_rate(std::span<const double> weights, std::span<const double> success,
                   std::span<const std::size_t> order, double budget) {
  double remaining = budget;
  double rate = 0.0;
  for (std::size_t i : order) {
    if (remaining <= 0.0) break;
    const double used = std::min(remaining, weights[i]);
    rate += used * success[i];
    remaining -= used;
  }
  return rate;
}

std::vector<double> merge_grid(std::span<const double> grid, std::span<const double> extra) {
  std::vector<double> budgets;
  budgets.push_back(0.0);
  for (double g : grid) {
    if (!(g >= 0.0 && g <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "budget grid values must lie in [0, 1]");
    }
    budgets.push_back(g);
  }
  for (double e : extra) {
    if (e > 0.0 && e < 1.0) budgets.push_back(e);
  }
  std::sort(budgets.begin(), budgets.end());
  budgets.erase(std::unique(budgets.begin(), budgets.end()), budgets.end());
  return budgets;
}

CapacityCurve greedy_curve(Grade grade, std::span<const double> weights,
                           std::span<const double> success, std::span<const double> grid) {
  const auto order = order_by_success(success);
  std::vector<double> knees;
  double cumulative = 0.0;
  for (std::size_t i : order) {
    cumulative += weights[i];
    knees.push_back(cumulative);
  }
  std::vector<CurvePoint> points;
  for (double b : merge_grid(grid, knees)) points.push_back({b, greedy_rate(weights, success, order, b)});
  return CapacityCurve(grade, std::move(points));
}

// ---------------------------------------------------------------------------
// ACK/NAK bound

struct Edge {
  std::uint32_t to;
  double prob;
};

struct LatticeMdp {
  std::size_t size = 0;
  std::vector<double> success;  // per vertex
  std::vector<std::size_t> tx_begin, df_begin;
  std::vector<Edge> tx_edges, df_edges;
  std::vector<double> start;  // initial distribution over vertices

  std::span<const Edge> tx(std::size_t v) const {
    return {tx_edges.data() + tx_begin[v], tx_begin[v + 1] - tx_begin[v]};
  }
  std::span<const Edge> df(std::size_t v) const {
    return {df_edges.data() + df_begin[v], df_begin[v + 1] - df_begin[v]};
  }
};

void add_split(const SimplexLattice& lattice, std::span<const double> probs, double mass,
               std::vector<Edge>& edges, std::size_t first,
               std::vector<SimplexLattice::Weighted>& scratch) {
  if (mass <= 0.0) return;
  lattice.split(probs, scratch);
  for (const auto& w : scratch) {
    bool merged = false;
    for (std::size_t e = first; e < edges.size(); ++e) {
      if (edges[e].to == w.index) {
        edges[e].prob += mass * w.weight;
        merged = true;
        break;
      }
    }
    if (!merged) edges.push_back({static_cast<std::uint32_t>(w.index), mass * w.weight});
  }
}

LatticeMdp build_lattice_mdp(const ChannelModel& model, const AckNakBoundOptions& options) {
  const std::size_t n = model.n_states();
  const SimplexLattice lattice(n, options.belief_bins);
  LatticeMdp mdp;
  mdp.size = lattice.size();
  mdp.success.resize(mdp.size);
  mdp.tx_begin.push_back(0);
  mdp.df_begin.push_back(0);

  std::vector<SimplexLattice::Weighted> scratch;
  std::vector<double> predicted(n), posterior(n);
  for (std::size_t v = 0; v < mdp.size; ++v) {
    const Belief filtered = lattice.point(v);
    std::fill(predicted.begin(), predicted.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = model.row(i);
      for (std::size_t j = 0; j < n; ++j) predicted[j] += filtered[i] * row[j];
    }
    double p = 0.0;
    for (std::size_t j = 0; j < n; ++j) p += predicted[j] * (1.0 - model.loss(j));
    p = std::clamp(p, 0.0, 1.0);
    mdp.success[v] = p;

    const std::size_t tx_first = mdp.tx_edges.size();
    for (const bool ack : {true, false}) {
      const double mass = ack ? p : 1.0 - p;
      if (mass <= 0.0) continue;
      double total = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        posterior[j] = predicted[j] * (ack ? 1.0 - model.loss(j) : model.loss(j));
        total += posterior[j];
      }
      if (!(total > 0.0)) continue;
      for (double& x : posterior) x /= total;
      add_split(lattice, posterior, mass, mdp.tx_edges, tx_first, scratch);
    }
    mdp.tx_begin.push_back(mdp.tx_edges.size());

    const std::size_t df_first = mdp.df_edges.size();
    if (options.feedback == FeedbackMode::ObserveAlways) {
      mdp.df_edges.insert(mdp.df_edges.end(), mdp.tx_edges.begin() + static_cast<std::ptrdiff_t>(tx_first),
                          mdp.tx_edges.end());
    } else {
      add_split(lattice, predicted, 1.0, mdp.df_edges, df_first, scratch);
    }
    mdp.df_begin.push_back(mdp.df_edges.size());
  }

  // The belief before slot 0 is pi; pi P = pi, so pi itself is a valid
  // filtered posterior to start from.
  mdp.start.assign(mdp.size, 0.0);
  lattice.split(model.stationary(), scratch);
  for (const auto& w : scratch) mdp.start[w.index] += w.weight;
  return mdp;
}

constexpr double kAperiodicity = 0.5;  // weight of the real transition in the lazy chain

// Relative value iteration on the lazy chain for reward success - lambda on
// transmit. Updates `h` in place (warm start) and returns the greedy policy.
std::vector<std::uint8_t> solve_lagrangian(const LatticeMdp& mdp, double lambda,
                                           const AckNakBoundOptions& options,
                                           std::vector<double>& h) {
  const std::size_t K = mdp.size;
  std::vector<double> next(K);
  std::vector<std::uint8_t> policy(K, 0);
  const double tau = kAperiodicity;
  for (std::size_t sweep = 0; sweep < options.max_sweeps; ++sweep) {
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t v = 0; v < K; ++v) {
      double q_tx = tau * (mdp.success[v] - lambda) + (1.0 - tau) * h[v];
      for (const Edge& e : mdp.tx(v)) q_tx += tau * e.prob * h[e.to];
      double q_df = (1.0 - tau) * h[v];
      for (const Edge& e : mdp.df(v)) q_df += tau * e.prob * h[e.to];
      const bool tx = q_tx > q_df + 1e-14;
      next[v] = tx ? q_tx : q_df;
      policy[v] = static_cast<std::uint8_t>(tx);
      const double diff = next[v] - h[v];
      lo = std::min(lo, diff);
      hi = std::max(hi, diff);
    }
    const double ref = next[0];
    for (std::size_t v = 0; v < K; ++v) h[v] = next[v] - ref;
    if (hi - lo < options.tol * tau) return policy;
  }
  throw Error(ErrorCode::NoConvergence,
              "relative value iteration did not reach span " + std::to_string(options.tol) +
                  " within " + std::to_string(options.max_sweeps) + " sweeps");
}

struct Operating {
  double attempts;
  double successes;
};

// Long-run attempt and success rates of a stationary policy started from
// mdp.start, by power iteration on the lazy chain.
Operating evaluate(const LatticeMdp& mdp, const std::vector<std::uint8_t>& policy,
                   const AckNakBoundOptions& options) {
  const std::size_t K = mdp.size;
  std::vector<double> x = mdp.start, y(K);
  const double tau = kAperiodicity;
  const double tol = std::max(options.tol * 1e-3, 1e-15);
  for (std::size_t sweep = 0; sweep < options.max_sweeps; ++sweep) {
    for (std::size_t v = 0; v < K; ++v) y[v] = (1.0 - tau) * x[v];
    for (std::size_t v = 0; v < K; ++v) {
      if (x[v] == 0.0) continue;
      const auto edges = policy[v] ? mdp.tx(v) : mdp.df(v);
      for (const Edge& e : edges) y[e.to] += tau * x[v] * e.prob;
    }
    double delta = 0.0;
    for (std::size_t v = 0; v < K; ++v) delta += std::abs(y[v] - x[v]);
    std::swap(x, y);
    if (delta < tol) {
      Operating op{0.0, 0.0};
      for (std::size_t v = 0; v < K; ++v) {
        if (!policy[v]) continue;
        op.attempts += x[v];
        op.successes += x[v] * mdp.success[v];
      }
      return op;
    }
  }
  throw Error(ErrorCode::NoConvergence, "stationary distribution of the lattice chain did not converge");
}

class HullSearch {
 public:
  HullSearch(const LatticeMdp& mdp, const AckNakBoundOptions& options)
      : mdp_(mdp), options_(options), h_(mdp.size, 0.0) {}

  std::vector<Operating> run() {
    const Operating top = solve(0.0);
    const Operating bottom{0.0, 0.0};  // never transmitting
    std::vector<Operating> hull{bottom};
    if (top.attempts > 0.0) {
      refine(bottom, top, hull, 0);
      hull.push_back(top);
    }
    return hull;
  }

 private:
  Operating solve(double lambda) {
    const auto policy = solve_lagrangian(mdp_, lambda, options_, h_);
    return evaluate(mdp_, policy, options_);
  }

  void refine(const Operating& left, const Operating& right, std::vector<Operating>& hull,
              int depth) {
    const double width = right.attempts - left.attempts;
    if (width <= 1e-12 || depth > 60) return;
    const double lambda = (right.successes - left.successes) / width;
    const Operating mid = solve(lambda);
    const double gain = mid.successes - lambda * mid.attempts;
    const double line = left.successes - lambda * left.attempts;
    const double slack = 10.0 * options_.tol + 1e-12;
    if (gain <= line + slack || mid.attempts <= left.attempts + 1e-12 ||
        mid.attempts >= right.attempts - 1e-12) {
      return;
    }
    refine(left, mid, hull, depth + 1);
    hull.push_back(mid);
    refine(mid, right, hull, depth + 1);
  }

  const LatticeMdp& mdp_;
  const AckNakBoundOptions& options_;
  std::vector<double> h_;
};

}  // namespace

std::string_view to_string(Grade grade) noexcept {
  switch (grade) {
    case Grade::PerfectCSI: return "perfect_csi";
    case Grade::DelayedCSI: return "delayed_csi";
    case Grade::AckNakFeedback: return "acknak";
    case Grade::Blind: return "blind";
  }
  return "unknown";
}

CapacityCurve::CapacityCurve(Grade grade, std::vector<CurvePoint> points)
    : grade_(grade), points_(std::move(points)) {
  if (points_.empty()) throw Error(ErrorCode::InvalidArgument, "capacity curve needs points");
  std::sort(points_.begin(), points_.end(),
            [](const CurvePoint& a, const CurvePoint& b) { return a.budget < b.budget; });
}

double CapacityCurve::rate_at(double budget) const {
  if (budget <= points_.front().budget) return points_.front().rate;
  if (budget >= points_.back().budget) return points_.back().rate;
  const auto it = std::upper_bound(points_.begin(), points_.end(), budget,
                                   [](double b, const CurvePoint& p) { return b < p.budget; });
  const CurvePoint& hi = *it;
  const CurvePoint& lo = *(it - 1);
  const double t = (budget - lo.budget) / (hi.budget - lo.budget);
  return lo.rate + t * (hi.rate - lo.rate);
}

double CapacityCurve::cost_for(double rate) const {
  double best = -INFINITY;
  for (const auto& p : points_) best = std::max(best, p.rate);
  if (rate > best + 1e-12) {
    throw Error(ErrorCode::RateUnachievable, "rate " + std::to_string(rate) +
                                                 " exceeds the curve maximum " + std::to_string(best));
  }
  if (rate <= points_.front().rate) return points_.front().budget;
  for (std::size_t i = 1; i < points_.size(); ++i) {
    const CurvePoint& lo = points_[i - 1];
    const CurvePoint& hi = points_[i];
    if (hi.rate >= rate) {
      if (hi.rate <= lo.rate) return hi.budget;
      const double t = (rate - lo.rate) / (hi.rate - lo.rate);
      return lo.budget + std::clamp(t, 0.0, 1.0) * (hi.budget - lo.budget);
    }
  }
  return points_.back().budget;
}

std::vector<double> uniform_budget_grid(std::size_t intervals) {
  if (intervals == 0) throw Error(ErrorCode::InvalidArgument, "grid needs at least one interval");
  std::vector<double> grid(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i) grid[i] = static_cast<double>(i) / intervals;
  return grid;
}

CapacityCurve capacity_perfect_csi(const ChannelModel& model, std::span<const double> grid) {
  std::vector<double> success(model.n_states());
  for (std::size_t i = 0; i < success.size(); ++i) success[i] = 1.0 - model.loss(i);
  return greedy_curve(Grade::PerfectCSI, model.stationary(), success, grid);
}

std::vector<double> perfect_csi_knees(const ChannelModel& model) {
  std::vector<double> success(model.n_states());
  for (std::size_t i = 0; i < success.size(); ++i) success[i] = 1.0 - model.loss(i);
  const auto order = order_by_success(success);
  const auto pi = model.stationary();
  std::vector<double> knees;
  double cumulative = 0.0;
  for (std::size_t t = 0; t + 1 < order.size(); ++t) {
    cumulative += pi[order[t]];
    if (success[order[t]] > success[order[t + 1]]) knees.push_back(cumulative);
  }
  return knees;
}

CapacityCurve capacity_delayed_csi(const ChannelModel& model, std::span<const double> grid) {
  const std::size_t n = model.n_states();
  std::vector<double> success(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = model.row(i);
    for (std::size_t j = 0; j < n; ++j) success[i] += row[j] * (1.0 - model.loss(j));
  }
  return greedy_curve(Grade::DelayedCSI, model.stationary(), success, grid);
}

CapacityCurve capacity_blind(const ChannelModel& model, std::span<const double> grid) {
  const double slope = model.mean_success();
  std::vector<CurvePoint> points;
  for (double b : merge_grid(grid, {})) points.push_back({b, b * slope});
  return CapacityCurve(Grade::Blind, std::move(points));
}

CapacityCurve capacity_acknak(const ChannelModel& model, std::span<const double> grid,
                              const AckNakBoundOptions& options) {
  if (options.belief_bins < 1) throw Error(ErrorCode::GridTooCoarse, "belief_bins must be >= 1");
  if (!(options.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tol must be > 0");
  const LatticeMdp mdp = build_lattice_mdp(model, options);
  HullSearch search(mdp, options);
  const auto hull = search.run();

  std::vector<CurvePoint> vertices;
  std::vector<double> breaks;
  for (const auto& op : hull) {
    vertices.push_back({op.attempts, op.successes});
    breaks.push_back(op.attempts);
  }
  const CapacityCurve envelope(Grade::AckNakFeedback, vertices);
  std::vector<CurvePoint> points;
  for (double b : merge_grid(grid, breaks)) points.push_back({b, envelope.rate_at(b)});
  return CapacityCurve(Grade::AckNakFeedback, std::move(points));
}

double power_penalty(const CapacityCurve& worse, const CapacityCurve& better,
                     std::span<const double> rates) {
  if (rates.empty()) throw Error(ErrorCode::InvalidArgument, "power_penalty needs at least one rate");
  double worst = -INFINITY;
  for (double r : rates) {
    if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "rates must be > 0");
    const double a = worse.cost_for(r);
    const double b = better.cost_for(r);
    worst = std::max(worst, 10.0 * std::log10(a / b));
  }
  return worst;
}

double realized_penalty(double attempts, double reference_attempts) {
  if (!(reference_attempts > 0.0)) {
    throw Error(ErrorCode::ZeroReference, "reference scheduler made no attempts");
  }
  if (!(attempts > 0.0)) throw Error(ErrorCode::InvalidArgument, "attempt count must be > 0");
  return 10.0 * std::log10(attempts / reference_attempts);
}

}  // namespace fsmc
