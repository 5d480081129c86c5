#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "fsmc/channel.hpp"
#include "oracles.hpp"

namespace fsmc::test {

inline ChannelModel reference_2smc() { return build_channel({{0.8, 0.2}, {0.1, 0.9}}, {0.2, 0.8}); }

inline ChannelModel reference_3smc() {
  return build_channel({{0.9, 0.025, 0.075}, {0.075, 0.875, 0.05}, {0.05, 0.05, 0.9}},
                       {0.2, 0.85, 0.95});
}

inline oracle::Chain to_chain(const ChannelModel& m) {
  oracle::Chain c;
  for (std::size_t i = 0; i < m.n_states(); ++i) {
    const auto row = m.row(i);
    c.P.emplace_back(row.begin(), row.end());
  }
  c.eps.assign(m.loss().begin(), m.loss().end());
  return c;
}

/// Random chain with every transition probability positive, so it is
/// irreducible and aperiodic.
inline ChannelModel random_channel(std::mt19937_64& gen, std::size_t n) {
  std::uniform_real_distribution<double> u(0.02, 1.0);
  std::vector<std::vector<double>> P(n, std::vector<double>(n));
  for (auto& row : P) {
    double total = 0.0;
    for (double& x : row) total += (x = u(gen));
    for (double& x : row) x /= total;
  }
  std::uniform_real_distribution<double> e(0.0, 1.0);
  std::vector<double> eps(n);
  for (double& x : eps) x = e(gen);
  return build_channel(P, eps);
}

}  // namespace fsmc::test
