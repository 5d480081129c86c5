#include "fsmc/channel.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

#include "fsmc/error.hpp"
#include "fsmc/rng.hpp"

namespace fsmc {
namespace {

constexpr double kRowSumTolerance = 1e-9;

std::vector<int> bfs_levels(const std::vector<double>& p, std::size_t n, bool reverse) {
  std::vector<int> level(n, -1);
  std::queue<std::size_t> frontier;
  level[0] = 0;
  frontier.push(0);
  while (!frontier.empty()) {
    const std::size_t u = frontier.front();
    frontier.pop();
    for (std::size_t v = 0; v < n; ++v) {
      const double w = reverse ? p[v * n + u] : p[u * n + v];
      if (w > 0.0 && level[v] < 0) {
        level[v] = level[u] + 1;
        frontier.push(v);
      }
    }
  }
  return level;
}

std::vector<double> solve_stationary(const std::vector<double>& p, std::size_t n) {
  // pi (P - I) = 0 with one balance equation replaced by sum(pi) = 1.
  Eigen::MatrixXd a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
          p[i * n + j] - (i == j ? 1.0 : 0.0);
    }
  }
  a.row(static_cast<Eigen::Index>(n - 1)).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  rhs(static_cast<Eigen::Index>(n - 1)) = 1.0;
  const Eigen::VectorXd pi = a.colPivHouseholderQr().solve(rhs);

  std::vector<double> out(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::max(0.0, pi(static_cast<Eigen::Index>(i)));
    total += out[i];
  }
  for (double& x : out) x /= total;
  return out;
}

}  // namespace

double ChannelModel::mean_success() const noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < n_states(); ++i) s += stationary_[i] * (1.0 - loss_[i]);
  return s;
}

ChannelModel build_channel(std::vector<std::vector<double>> transition, std::vector<double> loss) {
  const std::size_t n = transition.size();
  if (n == 0) throw Error(ErrorCode::DimensionMismatch, "channel needs at least one state");
  if (loss.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "loss vector has " + std::to_string(loss.size()) +
                                                  " entries for " + std::to_string(n) + " states");
  }
  if (n > 0xFFFF) throw Error(ErrorCode::DimensionMismatch, "too many states");

  ChannelModel model;
  model.transition_.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    if (transition[i].size() != n) {
      throw Error(ErrorCode::DimensionMismatch, "transition matrix is not square");
    }
    double sum = 0.0;
    for (double x : transition[i]) {
      if (!std::isfinite(x) || x < 0.0) {
        throw Error(ErrorCode::RowNotStochastic,
                    "row " + std::to_string(i) + " has a negative or non-finite entry");
      }
      sum += x;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "row " << i << " sums to " << sum;
      throw Error(ErrorCode::RowNotStochastic, msg.str());
    }
    for (double x : transition[i]) model.transition_.push_back(x / sum);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(loss[i] >= 0.0 && loss[i] <= 1.0)) {
      throw Error(ErrorCode::LossOutOfRange, "loss probability of state " + std::to_string(i) +
                                                 " is outside [0, 1]");
    }
  }
  model.loss_ = std::move(loss);

  const auto forward = bfs_levels(model.transition_, n, false);
  const auto backward = bfs_levels(model.transition_, n, true);
  for (std::size_t i = 0; i < n; ++i) {
    if (forward[i] < 0 || backward[i] < 0) {
      throw Error(ErrorCode::Reducible, "state " + std::to_string(i) +
                                            " does not communicate with state 0");
    }
  }
  int period = 0;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      if (model.transition_[u * n + v] > 0.0) {
        period = std::gcd(period, std::abs(forward[u] + 1 - forward[v]));
      }
    }
  }
  if (period != 1) {
    throw Error(ErrorCode::Periodic, "chain has period " + std::to_string(period));
  }

  model.stationary_ = solve_stationary(model.transition_, n);
  if (n == 2) model.memory_ = 1.0 - model.transition_[1] - model.transition_[2];
  return model;
}

ChannelModel two_state_channel(double p12, double p21, double loss1, double loss2) {
  return build_channel({{1.0 - p12, p12}, {p21, 1.0 - p21}}, {loss1, loss2});
}

StationaryInfo stationary_and_memory(const ChannelModel& model) {
  const auto pi = model.stationary();
  return {{pi.begin(), pi.end()}, model.memory()};
}

Trajectory sample_trajectory(const ChannelModel& model, std::size_t horizon, std::uint64_t seed) {
  if (horizon == 0) throw Error(ErrorCode::InvalidArgument, "trajectory horizon must be >= 1");
  Trajectory traj;
  traj.seed = seed;
  traj.states.resize(horizon);
  traj.loss_draws.resize(horizon);

  Rng rng(seed);
  auto state = rng.categorical(model.stationary());
  for (std::size_t k = 0; k < horizon; ++k) {
    if (k > 0) state = rng.categorical(model.row(state));
    traj.states[k] = static_cast<std::uint16_t>(state);
    traj.loss_draws[k] = rng.uniform();
  }
  return traj;
}

}  // namespace fsmc
