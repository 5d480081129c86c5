// fsmc: command-line front end for solving, simulating and sweeping
// transmit/defer schedulers on finite-state Markov channels.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "fsmc/capacity.hpp"
#include "fsmc/config.hpp"
#include "fsmc/error.hpp"
#include "fsmc/harness.hpp"
#include "fsmc/sweep.hpp"
#include "fsmc/table.hpp"

namespace {

using nlohmann::ordered_json;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::string> out_dir;
  std::optional<std::size_t> threads;
  std::optional<std::size_t> horizon;
  std::optional<std::size_t> max_packets;
  std::optional<double> terminal_cost;
  std::vector<double> throughputs;
  std::vector<std::size_t> packets;
  std::optional<std::size_t> capacity_bins;
  std::optional<std::size_t> intervals;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON experiment config")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Base seed; trial i uses seed + i");
  cmd->add_option("--trials", o.trials, "Number of trajectories");
  cmd->add_option("--out-dir", o.out_dir, "Output directory");
  cmd->add_option("--threads", o.threads, "Worker threads (results do not depend on it)");
  cmd->add_option("--horizon", o.horizon, "Slots per trajectory (T)");
  cmd->add_option("--max-packets", o.max_packets, "Largest backlog the DP tables cover");
  cmd->add_option("--terminal-cost", o.terminal_cost, "Cost per packet left at the deadline");
  cmd->add_option("--throughput", o.throughputs, "Target throughputs d (w0 = round(d T))");
  cmd->add_option("--packets", o.packets, "Explicit queue loads w0");
  cmd->add_option("--capacity-bins", o.capacity_bins, "Lattice resolution of the ACK/NAK bound");
  cmd->add_option("--intervals", o.intervals, "Budget grid intervals for capacity curves");
}

fsmc::ExperimentConfig resolve(const Overrides& o, fsmc::ExperimentConfig base) {
  auto cfg = o.config.empty() ? std::move(base) : fsmc::load_config(o.config, std::move(base));
  if (o.seed) cfg.seed = *o.seed;
  if (o.trials) cfg.trials = *o.trials;
  if (o.out_dir) cfg.out_dir = *o.out_dir;
  if (o.threads) cfg.threads = *o.threads;
  if (o.horizon) cfg.horizon = *o.horizon;
  if (o.max_packets) cfg.max_packets = *o.max_packets;
  if (o.terminal_cost) cfg.terminal_cost = *o.terminal_cost;
  if (!o.throughputs.empty() || !o.packets.empty()) {
    cfg.throughputs = o.throughputs;
    cfg.packets = o.packets;
  }
  if (o.capacity_bins) cfg.capacity.belief_bins = *o.capacity_bins;
  if (o.intervals) cfg.capacity.intervals = *o.intervals;
  fsmc::validate(cfg);
  return cfg;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw fsmc::Error(fsmc::ErrorCode::InvalidArgument, "cannot write " + path.string());
  return out;
}

double rounded(double x) { return std::stod(fsmc::format_number(x)); }

void write_json(const std::filesystem::path& path, const ordered_json& j) {
  open_out(path) << j.dump(2) << '\n';
}

ordered_json config_json(const fsmc::ExperimentConfig& cfg) {
  return ordered_json::parse(fsmc::to_json_string(cfg));
}

fsmc::DPConfig dp_config(const fsmc::ExperimentConfig& cfg) {
  fsmc::DPConfig dp;
  dp.horizon = cfg.horizon;
  dp.max_packets = cfg.max_packets;
  dp.terminal_cost = cfg.terminal_cost;
  return dp;
}

std::size_t first_acknak_bins(const fsmc::ExperimentConfig& cfg) {
  for (const auto& s : cfg.schedulers) {
    if (s.kind == fsmc::SchedulerKind::AckNak) return s.belief_bins;
  }
  return 256;
}

int cmd_solve(const fsmc::ExperimentConfig& cfg) {
  const auto model = fsmc::build_channel(cfg.channel);
  const auto dp = dp_config(cfg);
  ordered_json out = ordered_json::array();
  for (const auto& s : cfg.schedulers) {
    if (s.kind != fsmc::SchedulerKind::CausalCSI && s.kind != fsmc::SchedulerKind::AckNak) continue;
    const auto policy = s.kind == fsmc::SchedulerKind::CausalCSI
                            ? fsmc::solve_causal_csi(model, dp, s.timing)
                            : fsmc::solve_acknak(model, dp, s.belief_bins);
    const auto table = fsmc::compile_dense(policy, model);
    const auto file = cfg.out_dir / (s.name + ".tbl");
    std::filesystem::create_directories(cfg.out_dir);
    table.save(file);
    ordered_json costs = ordered_json::array();
    for (std::size_t w0 : cfg.loads()) {
      costs.push_back({{"w0", w0}, {"expected_cost", rounded(policy.expected_cost(model, w0))}});
    }
    out.push_back({{"scheduler", s.name},
                   {"kind", std::string(fsmc::to_string(s.kind))},
                   {"table", file.filename().string()},
                   {"bytes", table.file_size()},
                   {"expected_cost", costs}});
    std::cout << s.name << ": " << file.string() << " (" << table.file_size() << " bytes)\n";
  }
  write_json(cfg.out_dir / "solve.json", {{"config", config_json(cfg)}, {"policies", out}});
  return 0;
}

int cmd_simulate(const fsmc::ExperimentConfig& cfg) {
  const auto metrics = fsmc::run(cfg);
  fsmc::write_artifacts(cfg, metrics);
  fsmc::write_csv(std::cout, metrics);
  return 0;
}

int cmd_capacity(const fsmc::ExperimentConfig& cfg, std::size_t rate_points) {
  const auto model = fsmc::build_channel(cfg.channel);
  const auto grid = fsmc::uniform_budget_grid(cfg.capacity.intervals);
  fsmc::AckNakBoundOptions options;
  options.belief_bins = cfg.capacity.belief_bins;
  options.tol = cfg.capacity.tol;
  options.feedback = cfg.capacity.feedback;
  const std::vector<fsmc::CapacityCurve> curves{
      fsmc::capacity_perfect_csi(model, grid), fsmc::capacity_delayed_csi(model, grid),
      fsmc::capacity_acknak(model, grid, options), fsmc::capacity_blind(model, grid)};

  auto csv = open_out(cfg.out_dir / "curves.csv");
  csv << "grade,P,rate\n";
  for (const auto& c : curves) {
    for (const auto& p : c.points()) {
      csv << fsmc::to_string(c.grade()) << ',' << fsmc::format_number(p.budget) << ','
          << fsmc::format_number(p.rate) << '\n';
    }
  }

  const double r_max = model.mean_success();
  std::vector<double> rates;
  for (std::size_t k = 1; k <= rate_points; ++k) {
    rates.push_back(r_max * static_cast<double>(k) / static_cast<double>(rate_points + 1));
  }
  ordered_json penalties = ordered_json::array();
  for (std::size_t better : {0u, 1u}) {
    for (std::size_t worse : {2u, 3u}) {
      const double a = fsmc::power_penalty(curves[worse], curves[better], rates);
      penalties.push_back({{"grade", std::string(fsmc::to_string(curves[worse].grade()))},
                           {"reference", std::string(fsmc::to_string(curves[better].grade()))},
                           {"a_db", rounded(a)}});
      std::cout << fsmc::to_string(curves[worse].grade()) << " vs "
                << fsmc::to_string(curves[better].grade()) << ": A_dB = " << fsmc::format_number(a)
                << '\n';
    }
  }
  write_json(cfg.out_dir / "penalties.json", {{"config", config_json(cfg)}, {"penalties", penalties}});
  return 0;
}

struct TableArgs {
  std::uint32_t belief_bins = 64;
  std::uint32_t w_levels = 10;
  std::string layout = "3d";
  std::optional<std::size_t> policy_bins;
  std::string output;
};

int cmd_compile_table(const fsmc::ExperimentConfig& cfg, const TableArgs& args) {
  const auto model = fsmc::build_channel(cfg.channel);
  const std::size_t bins = args.policy_bins.value_or(first_acknak_bins(cfg));
  const auto policy = fsmc::solve_acknak(model, dp_config(cfg), bins);
  fsmc::TableSpec spec;
  spec.belief_bins = args.belief_bins;
  spec.w_levels = args.w_levels;
  spec.max_packets = static_cast<std::uint32_t>(cfg.max_packets);
  spec.horizon = static_cast<std::uint32_t>(cfg.horizon);
  spec.layout = args.layout == "4d" ? fsmc::TableLayout::SlotQueueHistoryLevel
                                    : fsmc::TableLayout::SlotQueueBelief;
  const auto table = fsmc::compile_table(policy, spec, model);
  const std::filesystem::path file = args.output.empty() ? cfg.out_dir / "table.tbl"
                                                         : std::filesystem::path(args.output);
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  table.save(file);
  write_json(cfg.out_dir / "compile-table.json",
             {{"config", config_json(cfg)},
              {"table", {{"file", file.filename().string()},
                         {"layout", args.layout},
                         {"belief_bins", spec.belief_bins},
                         {"w_levels", spec.w_levels},
                         {"max_packets", spec.max_packets},
                         {"horizon", spec.horizon},
                         {"policy_bins", bins},
                         {"payload_bytes", spec.payload_bytes()},
                         {"file_bytes", table.file_size()}}}});
  std::cout << file.string() << ": payload " << spec.payload_bytes() << " bytes, file "
            << table.file_size() << " bytes\n";
  return 0;
}

int cmd_sweep(const fsmc::ExperimentConfig& cfg, fsmc::HoldQuantity hold, const std::string& name) {
  const auto rows = fsmc::memory_sweep(cfg, cfg.sweep.mu, hold);
  {
    auto csv = open_out(cfg.out_dir / (name + ".csv"));
    fsmc::write_sweep_csv(csv, rows);
  }
  write_json(cfg.out_dir / (name + ".json"), {{"config", config_json(cfg)}, {"rows", rows.size()}});
  fsmc::write_sweep_csv(std::cout, rows);
  return 0;
}

fsmc::ExperimentConfig steady_state_preset() {
  auto cfg = fsmc::default_config();
  cfg.sweep.pi1 = {0.2, 0.4, 0.6, 0.8};
  cfg.sweep.loss_pairs = {{0.1, 0.9}};
  cfg.sweep.throughput = 0.1;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-aware transmit/defer scheduling over finite-state Markov channels"};
  app.require_subcommand(1);

  Overrides o;
  auto* solve = app.add_subcommand("solve", "Solve DP schedulers and write dense policy tables");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo run; writes run.csv and run.json");
  auto* capacity = app.add_subcommand("capacity", "Capacity-cost curves and power penalties");
  auto* compile = app.add_subcommand("compile-table", "Compile an ACK/NAK policy into a packed table");
  auto* sweep_mu = app.add_subcommand("sweep-mu", "Penalties vs channel memory, stationary law held");
  auto* sweep_pi = app.add_subcommand("sweep-pi", "Penalties vs channel memory, loss pair held");
  for (auto* cmd : {solve, simulate, capacity, compile, sweep_mu, sweep_pi}) add_common(cmd, o);

  std::size_t rate_points = 25;
  capacity->add_option("--rate-points", rate_points, "Rates at which A_dB is evaluated");

  TableArgs table_args;
  compile->add_option("--belief-bins", table_args.belief_bins,
                      "Belief bins (3d) or history patterns (4d)");
  compile->add_option("--w-levels", table_args.w_levels,
                      "Queue levels (3d, 0 = exact) or belief levels (4d)");
  compile->add_option("--layout", table_args.layout, "3d or 4d")->check(CLI::IsMember({"3d", "4d"}));
  compile->add_option("--policy-bins", table_args.policy_bins, "Belief bins of the source DP");
  compile->add_option("--output", table_args.output, "Table file (default <out-dir>/table.tbl)");

  std::vector<double> mu;
  std::vector<double> pi1;
  std::vector<double> loss_pair;
  std::optional<double> sweep_throughput;
  bool no_simulate = false;
  for (auto* cmd : {sweep_mu, sweep_pi}) {
    cmd->add_option("--mu", mu, "Channel memory values");
    cmd->add_option("--pi1", pi1, "Stationary mass of state 1");
    cmd->add_option("--loss-pair", loss_pair, "Loss probabilities, two per case")->expected(2, 1 << 20);
    cmd->add_option("--sweep-throughput", sweep_throughput, "Throughput for the realized penalty");
    cmd->add_flag("--no-simulate", no_simulate, "Skip the Monte Carlo realized penalties");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    const bool steady = sweep_pi->parsed();
    auto cfg = resolve(o, steady ? steady_state_preset() : fsmc::default_config());
    if (!mu.empty()) cfg.sweep.mu = mu;
    if (!pi1.empty()) cfg.sweep.pi1 = pi1;
    if (!loss_pair.empty()) {
      if (loss_pair.size() % 2 != 0) {
        throw fsmc::Error(fsmc::ErrorCode::ConfigInvalid, "--loss-pair needs an even number of values");
      }
      cfg.sweep.loss_pairs.clear();
      for (std::size_t i = 0; i < loss_pair.size(); i += 2) {
        cfg.sweep.loss_pairs.push_back({loss_pair[i], loss_pair[i + 1]});
      }
    }
    if (sweep_throughput) cfg.sweep.throughput = *sweep_throughput;
    if (no_simulate) cfg.sweep.simulate = false;
    fsmc::validate(cfg);

    if (solve->parsed()) return cmd_solve(cfg);
    if (simulate->parsed()) return cmd_simulate(cfg);
    if (capacity->parsed()) return cmd_capacity(cfg, rate_points);
    if (compile->parsed()) return cmd_compile_table(cfg, table_args);
    if (sweep_mu->parsed()) return cmd_sweep(cfg, fsmc::HoldQuantity::Stationary, "sweep_mu");
    return cmd_sweep(cfg, fsmc::HoldQuantity::LossProbs, "sweep_pi");
  } catch (const fsmc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
