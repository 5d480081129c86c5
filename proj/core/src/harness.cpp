#include "fsmc/harness.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include "fsmc/error.hpp"
#include "fsmc/simulate.hpp"
#include "fsmc/table.hpp"

namespace fsmc {
namespace {

struct Prepared {
  const SchedulerSpec* spec = nullptr;
  std::shared_ptr<const Policy> policy;  // null for the non-causal scheduler
  std::optional<PolicyTable> table;
};

std::vector<Prepared> prepare(const ExperimentConfig& cfg, const ChannelModel& model) {
  DPConfig dp;
  dp.horizon = cfg.horizon;
  dp.max_packets = cfg.max_packets;
  dp.terminal_cost = cfg.terminal_cost;

  std::map<std::size_t, std::shared_ptr<const Policy>> acknak;
  std::map<CsiTiming, std::shared_ptr<const Policy>> causal;
  std::vector<Prepared> out;
  for (const auto& spec : cfg.schedulers) {
    Prepared p;
    p.spec = &spec;
    switch (spec.kind) {
      case SchedulerKind::NonCausalCSI:
        break;
      case SchedulerKind::CausalCSI: {
        auto& slot = causal[spec.timing];
        if (!slot) slot = std::make_shared<Policy>(solve_causal_csi(model, dp, spec.timing));
        p.policy = slot;
        break;
      }
      case SchedulerKind::AckNak: {
        auto& slot = acknak[spec.belief_bins];
        if (!slot) slot = std::make_shared<Policy>(solve_acknak(model, dp, spec.belief_bins));
        p.policy = slot;
        if (spec.table) {
          TableSpec ts;
          ts.belief_bins = spec.table->belief_bins;
          ts.w_levels = spec.table->w_levels;
          ts.max_packets = static_cast<std::uint32_t>(cfg.max_packets);
          ts.horizon = static_cast<std::uint32_t>(cfg.horizon);
          p.table = compile_table(*slot, ts, model);
        }
        break;
      }
      case SchedulerKind::Blind:
        p.policy = std::make_shared<Policy>(blind_policy());
        break;
    }
    out.push_back(std::move(p));
  }
  return out;
}

Outcome replay(const Prepared& p, const ChannelModel& model, const Trajectory& traj,
               std::size_t w0, double terminal_cost) {
  if (w0 == 0) return {};
  if (p.table) return run_table(*p.table, model, traj, w0);
  if (!p.policy) return run_noncausal(model, traj, w0, terminal_cost);
  return run_policy(*p.policy, model, traj, w0);
}

void mean_and_se(const std::vector<Outcome>& samples, std::size_t stride, std::size_t offset,
                 std::size_t n, bool attempts, double& mean, double& se) {
  // Welford keeps the reduction stable for 1e5+ trials.
  double m = 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& o = samples[i * stride + offset];
    const double x = attempts ? o.attempts : o.delivered;
    const double delta = x - m;
    m += delta / static_cast<double>(i + 1);
    s += delta * (x - m);
  }
  mean = m;
  se = n > 1 ? std::sqrt(s / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
}

}  // namespace

const SchedulerMetrics& RunMetrics::at(std::size_t load, std::size_t scheduler) const {
  return rows.at(load * schedulers + scheduler);
}

RunMetrics run(const ExperimentConfig& cfg, bool keep_samples) {
  validate(cfg);
  const ChannelModel model = build_channel(cfg.channel);
  const auto prepared = prepare(cfg, model);
  const auto loads = cfg.loads();
  const std::size_t n_sched = prepared.size();
  const std::size_t n_loads = loads.size();
  const std::size_t stride = n_sched * n_loads;

  std::vector<Outcome> samples(cfg.trials * stride);
  parallel_for(cfg.trials, cfg.threads, [&](std::size_t i) {
    const Trajectory traj = sample_trajectory(model, cfg.horizon, cfg.seed + i);
    for (std::size_t l = 0; l < n_loads; ++l) {
      for (std::size_t s = 0; s < n_sched; ++s) {
        samples[i * stride + l * n_sched + s] =
            replay(prepared[s], model, traj, loads[l], cfg.terminal_cost);
      }
    }
  });

  RunMetrics metrics;
  metrics.horizon = cfg.horizon;
  metrics.schedulers = n_sched;
  const double horizon = static_cast<double>(cfg.horizon);
  for (std::size_t l = 0; l < n_loads; ++l) {
    const double target = l < cfg.packets.size()
                              ? static_cast<double>(loads[l]) / horizon
                              : cfg.throughputs[l - cfg.packets.size()];
    for (std::size_t s = 0; s < n_sched; ++s) {
      const std::size_t offset = l * n_sched + s;
      SchedulerMetrics row;
      row.scheduler = prepared[s].spec->name;
      row.kind = prepared[s].spec->kind;
      row.w0 = loads[l];
      row.target_throughput = target;
      row.trials = cfg.trials;
      mean_and_se(samples, stride, offset, cfg.trials, true, row.mean_attempts, row.se_attempts);
      mean_and_se(samples, stride, offset, cfg.trials, false, row.mean_delivered, row.se_delivered);
      row.ntc = row.mean_attempts / horizon;
      row.delivered_throughput = row.mean_delivered / horizon;
      for (std::size_t i = 0; i < cfg.trials; ++i) {
        const auto delivered = samples[i * stride + offset].delivered;
        if (delivered < loads[l]) {
          ++row.drop_trials;
          row.dropped_packets += loads[l] - delivered;
        }
      }
      metrics.rows.push_back(std::move(row));
      if (keep_samples) {
        std::vector<std::uint32_t> a(cfg.trials);
        for (std::size_t i = 0; i < cfg.trials; ++i) a[i] = samples[i * stride + offset].attempts;
        metrics.attempts.push_back(std::move(a));
      }
    }
  }
  return metrics;
}

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

void write_csv(std::ostream& out, const RunMetrics& metrics) {
  out << "scheduler,kind,w0,target_throughput,trials,mean_attempts,se_attempts,mean_delivered,"
         "se_delivered,ntc,delivered_throughput,drop_trials,dropped_packets\n";
  for (const auto& r : metrics.rows) {
    out << r.scheduler << ',' << to_string(r.kind) << ',' << r.w0 << ','
        << format_number(r.target_throughput) << ',' << r.trials << ','
        << format_number(r.mean_attempts) << ',' << format_number(r.se_attempts) << ','
        << format_number(r.mean_delivered) << ',' << format_number(r.se_delivered) << ','
        << format_number(r.ntc) << ',' << format_number(r.delivered_throughput) << ','
        << r.drop_trials << ',' << r.dropped_packets << '\n';
  }
}

std::string summary_json(const ExperimentConfig& cfg, const RunMetrics& metrics) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["config"] = ordered_json::parse(to_json_string(cfg));
  j["loads"] = cfg.loads();
  ordered_json rows = ordered_json::array();
  for (const auto& r : metrics.rows) {
    // Numbers go through format_number so the JSON is as reproducible as the CSV.
    rows.push_back({{"scheduler", r.scheduler},
                    {"kind", std::string(to_string(r.kind))},
                    {"w0", r.w0},
                    {"target_throughput", std::stod(format_number(r.target_throughput))},
                    {"mean_attempts", std::stod(format_number(r.mean_attempts))},
                    {"se_attempts", std::stod(format_number(r.se_attempts))},
                    {"mean_delivered", std::stod(format_number(r.mean_delivered))},
                    {"ntc", std::stod(format_number(r.ntc))},
                    {"delivered_throughput", std::stod(format_number(r.delivered_throughput))},
                    {"drop_trials", r.drop_trials},
                    {"dropped_packets", r.dropped_packets}});
  }
  j["results"] = rows;
  return j.dump(2) + "\n";
}

void write_artifacts(const ExperimentConfig& cfg, const RunMetrics& metrics) {
  std::filesystem::create_directories(cfg.out_dir);
  {
    std::ofstream csv(cfg.out_dir / "run.csv", std::ios::binary);
    if (!csv) throw Error(ErrorCode::InvalidArgument, "cannot write " + (cfg.out_dir / "run.csv").string());
    write_csv(csv, metrics);
  }
  std::ofstream json(cfg.out_dir / "run.json", std::ios::binary);
  if (!json) throw Error(ErrorCode::InvalidArgument, "cannot write " + (cfg.out_dir / "run.json").string());
  json << summary_json(cfg, metrics);
}

}  // namespace fsmc
