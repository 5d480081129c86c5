#include "fsmc/sweep.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "fsmc/capacity.hpp"
#include "fsmc/error.hpp"
#include "fsmc/harness.hpp"

namespace fsmc {

ChannelModel channel_from_memory(double mu, double pi1, double loss1, double loss2) {
  if (!(mu < 1.0) || !(pi1 > 0.0 && pi1 < 1.0)) {
    throw Error(ErrorCode::InfeasibleMu, "mu = " + format_number(mu) + ", pi1 = " + format_number(pi1));
  }
  const double p21 = pi1 * (1.0 - mu);
  const double p12 = (1.0 - pi1) * (1.0 - mu);
  if (p12 < 0.0 || p12 > 1.0 || p21 < 0.0 || p21 > 1.0) {
    throw Error(ErrorCode::InfeasibleMu, "mu = " + format_number(mu) + " needs p12 = " +
                                             format_number(p12) + ", p21 = " + format_number(p21));
  }
  return two_state_channel(p12, p21, loss1, loss2);
}

namespace {

struct Case {
  double pi1;
  double loss1;
  double loss2;
};

std::vector<Case> cases_for(const SweepSpec& s, HoldQuantity hold) {
  if (s.pi1.empty() || s.loss_pairs.empty()) {
    throw Error(ErrorCode::ConfigInvalid, "sweep: pi1 and loss_pairs must be non-empty");
  }
  std::vector<Case> out;
  if (hold == HoldQuantity::Stationary) {
    for (const auto& lp : s.loss_pairs) out.push_back({s.pi1.front(), lp[0], lp[1]});
  } else {
    for (double p : s.pi1) out.push_back({p, s.loss_pairs.front()[0], s.loss_pairs.front()[1]});
  }
  return out;
}

double max_penalty(const CapacityCurve& worse, const CapacityCurve& better, std::size_t points) {
  const double r_max = std::min(worse.max_rate(), better.max_rate());
  if (!(r_max > 0.0)) return 0.0;
  std::vector<double> rates(points);
  for (std::size_t k = 0; k < points; ++k) {
    rates[k] = r_max * static_cast<double>(k + 1) / static_cast<double>(points + 1);
  }
  return power_penalty(worse, better, rates);
}

}  // namespace

std::vector<SweepRow> memory_sweep(const ExperimentConfig& base, std::span<const double> mu_values,
                                   HoldQuantity hold) {
  const auto grid = uniform_budget_grid(base.capacity.intervals);
  AckNakBoundOptions bound;
  bound.belief_bins = base.capacity.belief_bins;
  bound.tol = base.capacity.tol;
  bound.feedback = base.capacity.feedback;

  std::size_t bins = 256;
  for (const auto& s : base.schedulers) {
    if (s.kind == SchedulerKind::AckNak) {
      bins = s.belief_bins;
      break;
    }
  }

  std::vector<SweepRow> rows;
  for (const Case& c : cases_for(base.sweep, hold)) {
    for (double mu : mu_values) {
      const ChannelModel model = channel_from_memory(mu, c.pi1, c.loss1, c.loss2);
      SweepRow row;
      row.pi1 = c.pi1;
      row.loss1 = c.loss1;
      row.loss2 = c.loss2;
      row.mu = mu;
      row.p12 = model.transition(0, 1);
      row.p21 = model.transition(1, 0);

      const auto perfect = capacity_perfect_csi(model, grid);
      const auto delayed = capacity_delayed_csi(model, grid);
      const auto acknak = capacity_acknak(model, grid, bound);
      const auto blind = capacity_blind(model, grid);
      const std::size_t n = base.sweep.rate_points;
      row.a_db_acknak = max_penalty(acknak, delayed, n);
      row.a_db_blind = max_penalty(blind, delayed, n);
      row.a_db_acknak_perfect = max_penalty(acknak, perfect, n);
      row.a_db_blind_perfect = max_penalty(blind, perfect, n);

      if (base.sweep.simulate) {
        ExperimentConfig sim = base;
        sim.channel.transition = {{model.transition(0, 0), model.transition(0, 1)},
                                  {model.transition(1, 0), model.transition(1, 1)}};
        sim.channel.loss = {c.loss1, c.loss2};
        sim.packets.clear();
        sim.throughputs = {base.sweep.throughput};
        sim.schedulers = {
            {"causal", SchedulerKind::CausalCSI, CsiTiming::Current, 256, std::nullopt},
            {"acknak", SchedulerKind::AckNak, CsiTiming::Current, bins, std::nullopt},
            {"blind", SchedulerKind::Blind, CsiTiming::Current, 256, std::nullopt},
        };
        const RunMetrics m = run(sim);
        row.ntc_causal = m.at(0, 0).ntc;
        row.ntc_acknak = m.at(0, 1).ntc;
        row.ntc_blind = m.at(0, 2).ntc;
        row.l_db_acknak = realized_penalty(m.at(0, 1).mean_attempts, m.at(0, 0).mean_attempts);
        row.l_db_blind = realized_penalty(m.at(0, 2).mean_attempts, m.at(0, 0).mean_attempts);
      } else {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        row.l_db_acknak = row.l_db_blind = nan;
        row.ntc_causal = row.ntc_acknak = row.ntc_blind = nan;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "pi1,loss1,loss2,mu,p12,p21,a_db_acknak,a_db_blind,a_db_acknak_perfect,"
         "a_db_blind_perfect,l_db_acknak,l_db_blind,ntc_causal,ntc_acknak,ntc_blind\n";
  for (const auto& r : rows) {
    const double values[] = {r.pi1, r.loss1, r.loss2, r.mu, r.p12, r.p21,
                             r.a_db_acknak, r.a_db_blind, r.a_db_acknak_perfect,
                             r.a_db_blind_perfect, r.l_db_acknak, r.l_db_blind,
                             r.ntc_causal, r.ntc_acknak, r.ntc_blind};
    bool first = true;
    for (double v : values) {
      if (!first) out << ',';
      first = false;
      out << format_number(v);
    }
    out << '\n';
  }
}

}  // namespace fsmc
