#include "fsmc/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "fsmc/error.hpp"

namespace fsmc {
namespace {

using nlohmann::json;

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::ConfigInvalid, field + ": " + why);
}

void reject_unknown(const json& obj, const std::string& where, const std::set<std::string>& known) {
  if (!obj.is_object()) invalid(where.empty() ? "<root>" : where, "expected an object");
  for (const auto& item : obj.items()) {
    if (!known.count(item.key())) {
      invalid(where.empty() ? item.key() : where + "." + item.key(), "unknown key");
    }
  }
}

template <typename T>
T get(const json& obj, const std::string& key, const std::string& field) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    invalid(field, e.what());
  }
}

std::string feedback_name(FeedbackMode mode) {
  return mode == FeedbackMode::ObserveAlways ? "always" : "on_transmit";
}

std::string timing_name(CsiTiming timing) {
  return timing == CsiTiming::Current ? "current" : "delayed";
}

SchedulerSpec parse_scheduler(const json& j, const std::string& field) {
  reject_unknown(j, field, {"kind", "name", "timing", "belief_bins", "table"});
  SchedulerSpec s;
  if (!j.contains("kind")) invalid(field + ".kind", "missing");
  const auto kind = get<std::string>(j, "kind", field + ".kind");
  try {
    s.kind = scheduler_kind_from_string(kind);
  } catch (const Error&) {
    invalid(field + ".kind", "expected noncausal, causal, acknak or blind, got '" + kind + "'");
  }
  s.name = j.contains("name") ? get<std::string>(j, "name", field + ".name") : std::string(to_string(s.kind));
  if (j.contains("timing")) {
    const auto t = get<std::string>(j, "timing", field + ".timing");
    if (t == "current") s.timing = CsiTiming::Current;
    else if (t == "delayed") s.timing = CsiTiming::Delayed;
    else invalid(field + ".timing", "expected current or delayed");
  }
  if (j.contains("belief_bins")) s.belief_bins = get<std::size_t>(j, "belief_bins", field + ".belief_bins");
  if (j.contains("table")) {
    const auto& t = j.at("table");
    reject_unknown(t, field + ".table", {"belief_bins", "w_levels"});
    TableOptions opts;
    if (t.contains("belief_bins")) opts.belief_bins = get<std::uint32_t>(t, "belief_bins", field + ".table.belief_bins");
    if (t.contains("w_levels")) opts.w_levels = get<std::uint32_t>(t, "w_levels", field + ".table.w_levels");
    s.table = opts;
  }
  return s;
}

}  // namespace

ChannelModel build_channel(const ChannelSpec& spec) {
  return build_channel(spec.transition, spec.loss);
}

std::vector<std::size_t> ExperimentConfig::loads() const {
  std::vector<std::size_t> out = packets;
  for (double d : throughputs) {
    out.push_back(static_cast<std::size_t>(std::llround(d * static_cast<double>(horizon))));
  }
  return out;
}

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  cfg.schedulers = {
      {"noncausal", SchedulerKind::NonCausalCSI, CsiTiming::Current, 256, std::nullopt},
      {"causal", SchedulerKind::CausalCSI, CsiTiming::Current, 256, std::nullopt},
      {"acknak", SchedulerKind::AckNak, CsiTiming::Current, 256, std::nullopt},
      {"blind", SchedulerKind::Blind, CsiTiming::Current, 256, std::nullopt},
  };
  cfg.throughputs = {0.05, 0.1, 0.2};
  cfg.sweep.pi1 = {1.0 / 3.0};
  cfg.sweep.loss_pairs = {{0.01, 0.1}, {0.1, 0.9}, {0.0, 1.0}};
  return cfg;
}

ExperimentConfig parse_config(std::string_view json_text) {
  return parse_config(json_text, default_config());
}

ExperimentConfig parse_config(std::string_view json_text, ExperimentConfig base) {
  json root;
  try {
    root = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("malformed JSON: ") + e.what());
  }
  reject_unknown(root, "", {"channel", "schedulers", "horizon", "max_packets", "terminal_cost",
                            "packets", "throughputs", "trials", "seed", "threads", "out_dir",
                            "capacity", "sweep"});
  ExperimentConfig cfg = std::move(base);

  if (root.contains("channel")) {
    const auto& c = root.at("channel");
    reject_unknown(c, "channel", {"transition", "loss"});
    if (c.contains("transition")) {
      cfg.channel.transition = get<std::vector<std::vector<double>>>(c, "transition", "channel.transition");
    }
    if (c.contains("loss")) cfg.channel.loss = get<std::vector<double>>(c, "loss", "channel.loss");
  }
  if (root.contains("schedulers")) {
    const auto& list = root.at("schedulers");
    if (!list.is_array()) invalid("schedulers", "expected an array");
    cfg.schedulers.clear();
    for (std::size_t i = 0; i < list.size(); ++i) {
      cfg.schedulers.push_back(parse_scheduler(list[i], "schedulers[" + std::to_string(i) + "]"));
    }
  }
  if (root.contains("horizon")) cfg.horizon = get<std::size_t>(root, "horizon", "horizon");
  if (root.contains("max_packets")) cfg.max_packets = get<std::size_t>(root, "max_packets", "max_packets");
  if (root.contains("terminal_cost")) cfg.terminal_cost = get<double>(root, "terminal_cost", "terminal_cost");
  if (root.contains("packets") || root.contains("throughputs")) {
    cfg.packets.clear();
    cfg.throughputs.clear();
  }
  if (root.contains("packets")) cfg.packets = get<std::vector<std::size_t>>(root, "packets", "packets");
  if (root.contains("throughputs")) cfg.throughputs = get<std::vector<double>>(root, "throughputs", "throughputs");
  if (root.contains("trials")) cfg.trials = get<std::size_t>(root, "trials", "trials");
  if (root.contains("seed")) cfg.seed = get<std::uint64_t>(root, "seed", "seed");
  if (root.contains("threads")) cfg.threads = get<std::size_t>(root, "threads", "threads");
  if (root.contains("out_dir")) cfg.out_dir = get<std::string>(root, "out_dir", "out_dir");

  if (root.contains("capacity")) {
    const auto& c = root.at("capacity");
    reject_unknown(c, "capacity", {"intervals", "belief_bins", "feedback", "tol"});
    if (c.contains("intervals")) cfg.capacity.intervals = get<std::size_t>(c, "intervals", "capacity.intervals");
    if (c.contains("belief_bins")) cfg.capacity.belief_bins = get<std::size_t>(c, "belief_bins", "capacity.belief_bins");
    if (c.contains("tol")) cfg.capacity.tol = get<double>(c, "tol", "capacity.tol");
    if (c.contains("feedback")) {
      const auto f = get<std::string>(c, "feedback", "capacity.feedback");
      if (f == "always") cfg.capacity.feedback = FeedbackMode::ObserveAlways;
      else if (f == "on_transmit") cfg.capacity.feedback = FeedbackMode::ObserveOnTransmit;
      else invalid("capacity.feedback", "expected always or on_transmit");
    }
  }
  if (root.contains("sweep")) {
    const auto& s = root.at("sweep");
    reject_unknown(s, "sweep", {"mu", "pi1", "loss_pairs", "throughput", "rate_points", "simulate"});
    if (s.contains("mu")) cfg.sweep.mu = get<std::vector<double>>(s, "mu", "sweep.mu");
    if (s.contains("pi1")) cfg.sweep.pi1 = get<std::vector<double>>(s, "pi1", "sweep.pi1");
    if (s.contains("loss_pairs")) {
      cfg.sweep.loss_pairs = get<std::vector<std::array<double, 2>>>(s, "loss_pairs", "sweep.loss_pairs");
    }
    if (s.contains("throughput")) cfg.sweep.throughput = get<double>(s, "throughput", "sweep.throughput");
    if (s.contains("rate_points")) cfg.sweep.rate_points = get<std::size_t>(s, "rate_points", "sweep.rate_points");
    if (s.contains("simulate")) cfg.sweep.simulate = get<bool>(s, "simulate", "sweep.simulate");
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return load_config(path, default_config());
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), std::move(base));
}

void validate(const ExperimentConfig& cfg) {
  try {
    (void)build_channel(cfg.channel);
  } catch (const Error& e) {
    invalid("channel", e.what());
  }
  if (cfg.horizon == 0) invalid("horizon", "must be >= 1");
  if (cfg.max_packets == 0) invalid("max_packets", "must be >= 1");
  if (!(cfg.terminal_cost >= 0.0) || !std::isfinite(cfg.terminal_cost)) {
    invalid("terminal_cost", "must be finite and >= 0");
  }
  if (cfg.trials == 0) invalid("trials", "must be >= 1");
  if (cfg.threads == 0) invalid("threads", "must be >= 1");
  for (std::size_t i = 0; i < cfg.throughputs.size(); ++i) {
    const double d = cfg.throughputs[i];
    if (!(d > 0.0 && d <= 1.0)) invalid("throughputs[" + std::to_string(i) + "]", "must lie in (0, 1]");
  }
  const auto loads = cfg.loads();
  for (std::size_t i = 0; i < loads.size(); ++i) {
    if (loads[i] > cfg.max_packets) {
      invalid("loads[" + std::to_string(i) + "]",
              "w0 = " + std::to_string(loads[i]) + " exceeds max_packets");
    }
    if (loads[i] > cfg.horizon) {
      invalid("loads[" + std::to_string(i) + "]", "more packets than slots");
    }
  }
  std::set<std::string> names;
  for (std::size_t i = 0; i < cfg.schedulers.size(); ++i) {
    const auto& s = cfg.schedulers[i];
    const std::string field = "schedulers[" + std::to_string(i) + "]";
    if (!names.insert(s.name).second) invalid(field + ".name", "duplicate scheduler name '" + s.name + "'");
    if (s.kind == SchedulerKind::AckNak && s.belief_bins < 2) invalid(field + ".belief_bins", "must be >= 2");
    if (s.table && s.kind != SchedulerKind::AckNak) invalid(field + ".table", "only acknak schedulers compile to tables");
    if (s.table && s.table->belief_bins < 2) invalid(field + ".table.belief_bins", "must be >= 2");
  }
  if (cfg.capacity.intervals == 0) invalid("capacity.intervals", "must be >= 1");
  if (cfg.capacity.belief_bins < 1) invalid("capacity.belief_bins", "must be >= 1");
  if (!(cfg.capacity.tol > 0.0)) invalid("capacity.tol", "must be > 0");
  if (!(cfg.sweep.throughput > 0.0 && cfg.sweep.throughput <= 1.0)) invalid("sweep.throughput", "must lie in (0, 1]");
  if (cfg.sweep.rate_points == 0) invalid("sweep.rate_points", "must be >= 1");
  for (std::size_t i = 0; i < cfg.sweep.pi1.size(); ++i) {
    const double p = cfg.sweep.pi1[i];
    if (!(p > 0.0 && p < 1.0)) invalid("sweep.pi1[" + std::to_string(i) + "]", "must lie in (0, 1)");
  }
  for (std::size_t i = 0; i < cfg.sweep.loss_pairs.size(); ++i) {
    for (double e : cfg.sweep.loss_pairs[i]) {
      if (!(e >= 0.0 && e <= 1.0)) invalid("sweep.loss_pairs[" + std::to_string(i) + "]", "must lie in [0, 1]");
    }
  }
}

std::string to_json_string(const ExperimentConfig& cfg) {
  json j;
  j["channel"] = {{"transition", cfg.channel.transition}, {"loss", cfg.channel.loss}};
  json schedulers = json::array();
  for (const auto& s : cfg.schedulers) {
    json e = {{"name", s.name}, {"kind", std::string(to_string(s.kind))}};
    if (s.kind == SchedulerKind::CausalCSI) e["timing"] = timing_name(s.timing);
    if (s.kind == SchedulerKind::AckNak) e["belief_bins"] = s.belief_bins;
    if (s.table) e["table"] = {{"belief_bins", s.table->belief_bins}, {"w_levels", s.table->w_levels}};
    schedulers.push_back(e);
  }
  j["schedulers"] = schedulers;
  j["horizon"] = cfg.horizon;
  j["max_packets"] = cfg.max_packets;
  j["terminal_cost"] = cfg.terminal_cost;
  j["packets"] = cfg.packets;
  j["throughputs"] = cfg.throughputs;
  j["trials"] = cfg.trials;
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["out_dir"] = cfg.out_dir.string();
  j["capacity"] = {{"intervals", cfg.capacity.intervals},
                   {"belief_bins", cfg.capacity.belief_bins},
                   {"feedback", feedback_name(cfg.capacity.feedback)},
                   {"tol", cfg.capacity.tol}};
  j["sweep"] = {{"mu", cfg.sweep.mu},
                {"pi1", cfg.sweep.pi1},
                {"loss_pairs", cfg.sweep.loss_pairs},
                {"throughput", cfg.sweep.throughput},
                {"rate_points", cfg.sweep.rate_points},
                {"simulate", cfg.sweep.simulate}};
  return j.dump(2);
}

}  // namespace fsmc
