#include "fsmc/dp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fsmc/error.hpp"

namespace fsmc {
namespace {

// Transmit only when strictly cheaper; near-ties go to Defer.
bool prefer_transmit(double transmit, double defer) {
  return transmit < defer - 1e-12 * std::max(1.0, std::abs(defer));
}

void check_backlog_range(const Policy& p, std::size_t k, std::size_t w, std::size_t info) {
  if (k >= p.horizon() || w > p.max_packets() || info >= p.info_size()) {
    throw Error(ErrorCode::OutOfBounds, "policy lookup (k=" + std::to_string(k) +
                                            ", w=" + std::to_string(w) +
                                            ", info=" + std::to_string(info) + ") out of range");
  }
}

}  // namespace

std::string_view to_string(SchedulerKind kind) noexcept {
  switch (kind) {
    case SchedulerKind::NonCausalCSI: return "noncausal";
    case SchedulerKind::CausalCSI: return "causal";
    case SchedulerKind::AckNak: return "acknak";
    case SchedulerKind::Blind: return "blind";
  }
  return "unknown";
}

SchedulerKind scheduler_kind_from_string(std::string_view name) {
  if (name == "noncausal") return SchedulerKind::NonCausalCSI;
  if (name == "causal") return SchedulerKind::CausalCSI;
  if (name == "acknak") return SchedulerKind::AckNak;
  if (name == "blind") return SchedulerKind::Blind;
  throw Error(ErrorCode::ConfigInvalid, "unknown scheduler kind '" + std::string(name) + "'");
}

void validate(const DPConfig& cfg) {
  if (cfg.horizon == 0) throw Error(ErrorCode::ConfigInvalid, "horizon must be >= 1");
  if (cfg.initial_packets > cfg.max_packets) {
    throw Error(ErrorCode::ConfigInvalid, "initial_packets exceeds max_packets");
  }
  if (!(cfg.terminal_cost >= 0.0) || !std::isfinite(cfg.terminal_cost)) {
    throw Error(ErrorCode::ConfigInvalid, "terminal_cost must be a finite value >= 0");
  }
}

Action Policy::action(std::size_t k, std::size_t w, std::size_t info) const {
  if (kind_ == SchedulerKind::Blind) return w > 0 ? Action::Transmit : Action::Defer;
  check_backlog_range(*this, k, w, info);
  return static_cast<Action>(actions_[cell(k, w, info)]);
}

double Policy::value(std::size_t k, std::size_t w, std::size_t info) const {
  if (k == 0) return initial_value(w, info);
  if (!has_values()) throw Error(ErrorCode::InvalidArgument, "policy was solved without values");
  if (k > horizon_ || w > max_packets_ || info >= info_size_) {
    throw Error(ErrorCode::OutOfBounds, "value lookup out of range");
  }
  return values_[cell(k, w, info)];
}

double Policy::initial_value(std::size_t w, std::size_t info) const {
  if (initial_values_.empty()) throw Error(ErrorCode::InvalidArgument, "policy has no value table");
  if (w > max_packets_ || info >= info_size_) {
    throw Error(ErrorCode::OutOfBounds, "value lookup out of range");
  }
  return initial_values_[w * info_size_ + info];
}

double Policy::expected_cost(const ChannelModel& model, std::size_t w) const {
  const auto pi = model.stationary();
  switch (kind_) {
    case SchedulerKind::CausalCSI: {
      if (timing_ == CsiTiming::Delayed) return initial_value(w, model.n_states());
      double v = 0.0;
      for (std::size_t s = 0; s < model.n_states(); ++s) v += pi[s] * initial_value(w, s);
      return v;
    }
    case SchedulerKind::AckNak:
      return initial_value(w, grid_->quantize(pi));
    default:
      throw Error(ErrorCode::InvalidArgument, "expected_cost needs a solved DP policy");
  }
}

Policy solve_causal_csi(const ChannelModel& model, const DPConfig& cfg, CsiTiming timing) {
  validate(cfg);
  const std::size_t n = model.n_states();
  const std::size_t T = cfg.horizon;
  const std::size_t W = cfg.max_packets;

  Policy policy;
  policy.kind_ = SchedulerKind::CausalCSI;
  policy.timing_ = timing;
  policy.horizon_ = T;
  policy.max_packets_ = W;
  policy.terminal_cost_ = cfg.terminal_cost;
  // Delayed timing gets one extra index: "no state seen yet", prior = pi.
  const std::size_t info = timing == CsiTiming::Current ? n : n + 1;
  policy.info_size_ = info;
  policy.actions_.assign(T * (W + 1) * info, 0);

  const std::size_t layer = (W + 1) * info;
  std::vector<double> next(layer), current(layer);
  for (std::size_t w = 0; w <= W; ++w) {
    for (std::size_t i = 0; i < info; ++i) next[w * info + i] = cfg.terminal_cost * static_cast<double>(w);
  }
  if (cfg.keep_values) {
    policy.values_.assign((T + 1) * layer, 0.0);
    std::copy(next.begin(), next.end(), policy.values_.begin() + static_cast<std::ptrdiff_t>(T * layer));
  }

  // Distribution of the state the transmission in this slot will see.
  std::vector<std::vector<double>> slot_dist(info, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < info; ++i) {
    if (timing == CsiTiming::Current) {
      slot_dist[i][i] = 1.0;
    } else if (i < n) {
      const auto row = model.row(i);
      slot_dist[i].assign(row.begin(), row.end());
    } else {
      const auto pi = model.stationary();
      slot_dist[i].assign(pi.begin(), pi.end());
    }
  }

  // E[V_{k+1}(w, next info) | state s in this slot].
  std::vector<double> expect(layer);
  for (std::size_t k = T; k-- > 0;) {
    for (std::size_t w = 0; w <= W; ++w) {
      for (std::size_t s = 0; s < n; ++s) {
        double e = 0.0;
        if (timing == CsiTiming::Current) {
          const auto row = model.row(s);
          for (std::size_t j = 0; j < n; ++j) e += row[j] * next[w * info + j];
        } else {
          e = next[w * info + s];  // next slot's info is this slot's state
        }
        expect[w * info + s] = e;
      }
    }
    for (std::size_t w = 0; w <= W; ++w) {
      for (std::size_t i = 0; i < info; ++i) {
        double defer = 0.0;
        double transmit = 1.0;
        for (std::size_t s = 0; s < n; ++s) {
          const double q = slot_dist[i][s];
          if (q == 0.0) continue;
          const double stay = expect[w * info + s];
          defer += q * stay;
          if (w > 0) {
            const double eps = model.loss(s);
            transmit += q * ((1.0 - eps) * expect[(w - 1) * info + s] + eps * stay);
          }
        }
        const bool tx = w > 0 && prefer_transmit(transmit, defer);
        current[w * info + i] = tx ? transmit : defer;
        policy.actions_[policy.cell(k, w, i)] = static_cast<std::uint8_t>(tx);
      }
    }
    std::swap(next, current);
    if (cfg.keep_values) {
      std::copy(next.begin(), next.end(), policy.values_.begin() + static_cast<std::ptrdiff_t>(k * layer));
    }
  }
  policy.initial_values_ = next;
  return policy;
}

Policy solve_acknak(const ChannelModel& model, const DPConfig& cfg, std::size_t belief_bins) {
  validate(cfg);
  if (belief_bins < 2) throw Error(ErrorCode::GridTooCoarse, "belief_bins must be >= 2");
  const std::size_t T = cfg.horizon;
  const std::size_t W = cfg.max_packets;

  Policy policy;
  policy.kind_ = SchedulerKind::AckNak;
  policy.horizon_ = T;
  policy.max_packets_ = W;
  policy.terminal_cost_ = cfg.terminal_cost;
  policy.grid_.emplace(model.n_states(), belief_bins);
  const BeliefGrid& grid = *policy.grid_;
  const std::size_t K = grid.size();
  policy.info_size_ = K;
  policy.actions_.assign(T * (W + 1) * K, 0);

  // Successor grid indices do not depend on (k, w): precompute once.
  std::vector<double> success(K);
  std::vector<std::size_t> on_ack(K), on_nak(K), on_defer(K);
  std::vector<double> next_belief(model.n_states());
  for (std::size_t i = 0; i < K; ++i) {
    const Belief b = grid.dequantize(i);
    success[i] = std::clamp(b.success_probability(model), 0.0, 1.0);
    step_into(b.probs(), model, Action::Defer, Observation::NoFeedback, next_belief);
    on_defer[i] = grid.quantize(next_belief);
    on_ack[i] = on_nak[i] = i;
    if (success[i] > 0.0) {
      step_into(b.probs(), model, Action::Transmit, Observation::Ack, next_belief);
      on_ack[i] = grid.quantize(next_belief);
    }
    if (success[i] < 1.0) {
      step_into(b.probs(), model, Action::Transmit, Observation::Nak, next_belief);
      on_nak[i] = grid.quantize(next_belief);
    }
  }

  const std::size_t layer = (W + 1) * K;
  std::vector<double> next(layer), current(layer);
  for (std::size_t w = 0; w <= W; ++w) {
    std::fill_n(next.begin() + static_cast<std::ptrdiff_t>(w * K), K,
                cfg.terminal_cost * static_cast<double>(w));
  }
  if (cfg.keep_values) {
    policy.values_.assign((T + 1) * layer, 0.0);
    std::copy(next.begin(), next.end(), policy.values_.begin() + static_cast<std::ptrdiff_t>(T * layer));
  }

  for (std::size_t k = T; k-- > 0;) {
    for (std::size_t i = 0; i < K; ++i) current[i] = next[on_defer[i]];  // w = 0
    for (std::size_t w = 1; w <= W; ++w) {
      const double* stay = next.data() + w * K;
      const double* down = next.data() + (w - 1) * K;
      std::uint8_t* act = policy.actions_.data() + policy.cell(k, w, 0);
      for (std::size_t i = 0; i < K; ++i) {
        const double defer = stay[on_defer[i]];
        const double transmit = 1.0 + success[i] * down[on_ack[i]] + (1.0 - success[i]) * stay[on_nak[i]];
        const bool tx = prefer_transmit(transmit, defer);
        current[w * K + i] = tx ? transmit : defer;
        act[i] = static_cast<std::uint8_t>(tx);
      }
    }
    std::swap(next, current);
    if (cfg.keep_values) {
      std::copy(next.begin(), next.end(), policy.values_.begin() + static_cast<std::ptrdiff_t>(k * layer));
    }
  }
  policy.initial_values_ = next;
  return policy;
}

Policy blind_policy() {
  Policy policy;
  policy.kind_ = SchedulerKind::Blind;
  return policy;
}

NonCausalResult solve_noncausal(const ChannelModel& model, const DPConfig& cfg,
                                const Trajectory& traj) {
  validate(cfg);
  if (traj.horizon() != cfg.horizon) {
    throw Error(ErrorCode::HorizonMismatch, "trajectory has " + std::to_string(traj.horizon()) +
                                                " slots, config horizon is " +
                                                std::to_string(cfg.horizon));
  }
  const std::size_t T = cfg.horizon;
  const std::size_t w0 = cfg.initial_packets;
  NonCausalResult result;
  if (w0 == 0) return result;

  std::vector<double> next(w0 + 1), current(w0 + 1);
  for (std::size_t w = 0; w <= w0; ++w) next[w] = cfg.terminal_cost * static_cast<double>(w);
  std::vector<std::uint8_t> actions(T * (w0 + 1), 0);
  for (std::size_t k = T; k-- > 0;) {
    const double eps = model.loss(traj.states[k]);
    current[0] = 0.0;
    for (std::size_t w = 1; w <= w0; ++w) {
      const double defer = next[w];
      const double transmit = 1.0 + (1.0 - eps) * next[w - 1] + eps * next[w];
      const bool tx = prefer_transmit(transmit, defer);
      current[w] = tx ? transmit : defer;
      actions[k * (w0 + 1) + w] = static_cast<std::uint8_t>(tx);
    }
    std::swap(next, current);
  }
  result.expected_cost = next[w0];

  std::size_t w = w0;
  for (std::size_t k = 0; k < T && w > 0; ++k) {
    if (!actions[k * (w0 + 1) + w]) continue;
    ++result.attempts;
    if (!traj.transmission_fails(model, k)) {
      ++result.delivered;
      --w;
    }
  }
  return result;
}

}  // namespace fsmc
