#pragma once

// Test-only reference computations. Nothing here calls into the library: the
// chain is passed as plain matrices and every Bayes update, expectation and
// stationary distribution is recomputed from scratch, so agreement with the
// library is evidence rather than tautology.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

struct Chain {
  std::vector<std::vector<double>> P;
  std::vector<double> eps;

  std::size_t n() const { return eps.size(); }
};

enum class Obs { Ack, Nak, None };

/// Stationary distribution by repeated multiplication of a lazy chain, which
/// converges for every irreducible chain.
inline std::vector<double> stationary(const Chain& c) {
  const std::size_t n = c.n();
  std::vector<double> pi(n, 1.0 / static_cast<double>(n)), next(n);
  for (int it = 0; it < 200000; ++it) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.5 * pi[j];
      for (std::size_t i = 0; i < n; ++i) s += 0.5 * pi[i] * c.P[i][j];
      next[j] = s;
    }
    double diff = 0.0;
    for (std::size_t j = 0; j < n; ++j) diff += std::abs(next[j] - pi[j]);
    pi.swap(next);
    if (diff < 1e-16) break;
  }
  return pi;
}

inline double likelihood(const Chain& c, std::size_t s, Obs o) {
  switch (o) {
    case Obs::Ack: return 1.0 - c.eps[s];
    case Obs::Nak: return c.eps[s];
    case Obs::None: return 1.0;
  }
  return 0.0;
}

/// P(s_L = j | o_0..o_{L-1}) with s_0 ~ b0, by summing over all n^(L+1)
/// hidden sequences.
inline std::vector<double> brute_force_posterior(const Chain& c, const std::vector<double>& b0,
                                                 const std::vector<Obs>& obs) {
  const std::size_t n = c.n();
  const std::size_t L = obs.size();
  std::vector<double> post(n, 0.0);
  std::vector<std::size_t> seq(L + 1, 0);
  while (true) {
    double p = b0[seq[0]];
    for (std::size_t k = 0; k < L && p != 0.0; ++k) {
      p *= likelihood(c, seq[k], obs[k]) * c.P[seq[k]][seq[k + 1]];
    }
    post[seq[L]] += p;
    std::size_t pos = 0;
    while (pos <= L && ++seq[pos] == n) seq[pos++] = 0;
    if (pos > L) break;
  }
  double total = 0.0;
  for (double x : post) total += x;
  for (double& x : post) x /= total;
  return post;
}

/// Minimum expected cost of the causal-CSI problem over every history-
/// dependent deterministic policy, by expectimax over the full tree of
/// (state, outcome) histories without memoization. With `delayed`, the
/// decision in slot k sees s_{k-1} (nothing in slot 0) instead of s_k.
inline double causal_tree_cost(const Chain& c, std::size_t T, std::size_t w0, double C,
                               bool delayed) {
  const std::size_t n = c.n();
  const auto pi = stationary(c);
  // dist: distribution of the slot-k state given what the decision sees.
  std::function<double(std::size_t, std::size_t, const std::vector<double>&)> value =
      [&](std::size_t k, std::size_t w, const std::vector<double>& dist) -> double {
    if (k == T) return C * static_cast<double>(w);
    // After slot k with state s, the next decision sees s (delayed) or s'.
    auto continuation = [&](std::size_t w_next, std::size_t s) {
      if (delayed) return value(k + 1, w_next, c.P[s]);
      double e = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (c.P[s][j] == 0.0) continue;
        std::vector<double> point(n, 0.0);
        point[j] = 1.0;
        e += c.P[s][j] * value(k + 1, w_next, point);
      }
      return e;
    };
    double defer = 0.0;
    double transmit = 1.0;
    for (std::size_t s = 0; s < n; ++s) {
      if (dist[s] == 0.0) continue;
      const double stay = continuation(w, s);
      defer += dist[s] * stay;
      if (w > 0) {
        transmit += dist[s] * ((1.0 - c.eps[s]) * continuation(w - 1, s) + c.eps[s] * stay);
      }
    }
    return w > 0 ? std::min(defer, transmit) : defer;
  };
  if (delayed) return value(0, w0, pi);
  double total = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<double> point(n, 0.0);
    point[s] = 1.0;
    total += pi[s] * value(0, w0, point);
  }
  return total;
}

/// Literal enumeration of every deterministic Markov policy over the decision
/// points (k, w, s), k < T, 1 <= w <= w0, with current-state CSI. Each policy
/// is evaluated exactly by propagating the joint (backlog, state) law. Only
/// practical while T * w0 * n stays small.
inline double causal_enumeration_cost(const Chain& c, std::size_t T, std::size_t w0, double C) {
  const std::size_t n = c.n();
  const std::size_t points = T * w0 * n;
  const auto pi = stationary(c);
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << points); ++mask) {
    auto transmits = [&](std::size_t k, std::size_t w, std::size_t s) {
      return (mask >> ((k * w0 + (w - 1)) * n + s)) & 1u;
    };
    std::vector<double> law((w0 + 1) * n, 0.0), next((w0 + 1) * n);
    for (std::size_t s = 0; s < n; ++s) law[w0 * n + s] = pi[s];
    double cost = 0.0;
    for (std::size_t k = 0; k < T; ++k) {
      std::fill(next.begin(), next.end(), 0.0);
      for (std::size_t w = 0; w <= w0; ++w) {
        for (std::size_t s = 0; s < n; ++s) {
          const double p = law[w * n + s];
          if (p == 0.0) continue;
          double to_down = 0.0;
          double to_stay = p;
          if (w > 0 && transmits(k, w, s)) {
            cost += p;
            to_down = p * (1.0 - c.eps[s]);
            to_stay = p * c.eps[s];
          }
          for (std::size_t j = 0; j < n; ++j) {
            next[w * n + j] += to_stay * c.P[s][j];
            if (w > 0) next[(w - 1) * n + j] += to_down * c.P[s][j];
          }
        }
      }
      law.swap(next);
    }
    for (std::size_t w = 0; w <= w0; ++w) {
      for (std::size_t s = 0; s < n; ++s) cost += C * static_cast<double>(w) * law[w * n + s];
    }
    best = std::min(best, cost);
  }
  return best;
}

/// Correct-then-predict, written out independently of the library.
inline std::vector<double> bayes_step(const Chain& c, const std::vector<double>& b, Obs o) {
  const std::size_t n = c.n();
  std::vector<double> post(n);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    post[i] = b[i] * likelihood(c, i, o);
    z += post[i];
  }
  std::vector<double> next(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) next[j] += post[i] / z * c.P[i][j];
  }
  return next;
}

/// Optimal ACK/NAK expected cost from belief b0 by expectimax over the exact
/// (unquantized) belief tree.
inline double acknak_tree_cost(const Chain& c, std::size_t T, std::size_t w0, double C,
                               const std::vector<double>& b0) {
  std::function<double(std::size_t, std::size_t, const std::vector<double>&)> value =
      [&](std::size_t k, std::size_t w, const std::vector<double>& b) -> double {
    if (k == T) return C * static_cast<double>(w);
    const double defer = value(k + 1, w, bayes_step(c, b, Obs::None));
    if (w == 0) return defer;
    double ps = 0.0;
    for (std::size_t i = 0; i < c.n(); ++i) ps += b[i] * (1.0 - c.eps[i]);
    double transmit = 1.0;
    if (ps > 0.0) transmit += ps * value(k + 1, w - 1, bayes_step(c, b, Obs::Ack));
    if (ps < 1.0) transmit += (1.0 - ps) * value(k + 1, w, bayes_step(c, b, Obs::Nak));
    return std::min(defer, transmit);
  };
  return value(0, w0, b0);
}

/// Expected cost when the whole state sequence is known in advance: each
/// slot's loss probability is fixed, only the loss draws stay random.
inline double noncausal_tree_cost(const std::vector<double>& eps_by_slot, std::size_t w0, double C) {
  std::function<double(std::size_t, std::size_t)> value = [&](std::size_t k, std::size_t w) {
    if (k == eps_by_slot.size()) return C * static_cast<double>(w);
    const double defer = value(k + 1, w);
    if (w == 0) return defer;
    const double e = eps_by_slot[k];
    return std::min(defer, 1.0 + (1.0 - e) * value(k + 1, w - 1) + e * value(k + 1, w));
  };
  return value(0, w0);
}

}  // namespace oracle
