#include "fsmc/table.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "fsmc/error.hpp"

namespace fsmc {
namespace {

void put_u16(std::uint8_t* p, std::uint16_t v) {
  p[0] = static_cast<std::uint8_t>(v);
  p[1] = static_cast<std::uint8_t>(v >> 8);
}

void put_u32(std::uint8_t* p, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::uint16_t get_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

void append_le(std::vector<std::uint8_t>& buf, double x) {
  const auto bits = std::bit_cast<std::uint64_t>(x);
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

std::size_t history_length(std::uint32_t patterns) {
  if (patterns == 0 || !std::has_single_bit(patterns)) {
    throw Error(ErrorCode::DimensionMismatch, "history axis needs a power-of-two pattern count");
  }
  return static_cast<std::size_t>(std::countr_zero(patterns));
}

// Representative backlog of queue cell c when 1..W is split into L cells.
std::size_t queue_cell_center(std::size_t c, std::size_t W, std::size_t L) {
  const std::size_t lo = (c * W) / L + 1;
  const std::size_t hi = ((c + 1) * W) / L;
  return (lo + hi + 1) / 2;
}

// Applies a transmission outcome; zero-probability evidence falls back to
// pure prediction so every (pattern, anchor) pair has a defined belief.
Belief apply_outcome(const Belief& b, const ChannelModel& model, bool ack) {
  const Observation obs = ack ? Observation::Ack : Observation::Nak;
  const double p = b.success_probability(model);
  if ((ack && p <= 0.0) || (!ack && p >= 1.0)) return predict(b, model);
  return step(b, model, Action::Transmit, obs);
}

void check_spec(const TableSpec& spec) {
  if (spec.horizon == 0 || spec.max_packets == 0 || spec.belief_bins == 0) {
    throw Error(ErrorCode::DimensionMismatch, "table dimensions must be positive");
  }
  if (spec.layout == TableLayout::SlotQueueHistoryLevel) {
    history_length(spec.belief_bins);
    if (spec.w_levels == 0) throw Error(ErrorCode::DimensionMismatch, "4-dim layout needs belief levels");
  } else if (spec.layout != TableLayout::SlotQueueBelief) {
    throw Error(ErrorCode::DimensionMismatch, "unknown table layout");
  }
}

}  // namespace

std::uint64_t TableSpec::payload_bits() const {
  const std::uint64_t T = horizon;
  const std::uint64_t B = belief_bins;
  if (layout == TableLayout::SlotQueueHistoryLevel) {
    return T * static_cast<std::uint64_t>(max_packets) * B * w_levels;
  }
  const std::uint64_t Q = w_levels == 0 ? static_cast<std::uint64_t>(max_packets) + 1 : w_levels;
  return T * Q * B;
}

Fingerprint channel_fingerprint(const ChannelModel& model) {
  std::vector<std::uint8_t> buf;
  const auto n = static_cast<std::uint16_t>(model.n_states());
  buf.push_back(static_cast<std::uint8_t>(n));
  buf.push_back(static_cast<std::uint8_t>(n >> 8));
  for (double p : model.transition_matrix()) append_le(buf, p);
  for (double e : model.loss()) append_le(buf, e);

  Fingerprint out{};
  unsigned int len = 0;
  if (EVP_Digest(buf.data(), buf.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
      len != out.size()) {
    throw Error(ErrorCode::InvalidArgument, "SHA-256 digest failed");
  }
  return out;
}

BeliefGrid grid_with_size(std::size_t n_states, std::size_t size) {
  if (n_states <= 2) {
    if (n_states == 1 && size == 1) return BeliefGrid(1, 2);
    if (n_states == 2 && size >= 2) return BeliefGrid(2, size);
    throw Error(ErrorCode::DimensionMismatch, "no belief grid with " + std::to_string(size) + " bins");
  }
  for (std::size_t r = 2;; ++r) {
    const SimplexLattice lattice(n_states, r);
    if (lattice.size() == size) return BeliefGrid(n_states, r);
    if (lattice.size() > size) break;
  }
  throw Error(ErrorCode::DimensionMismatch, "no " + std::to_string(n_states) +
                                                "-state simplex grid has " + std::to_string(size) +
                                                " points");
}

std::size_t PolicyTable::queue_cells() const {
  const auto& s = header_.spec;
  if (s.layout == TableLayout::SlotQueueHistoryLevel) return s.max_packets;
  return s.w_levels == 0 ? s.max_packets + 1 : s.w_levels;
}

std::size_t PolicyTable::queue_cell(std::size_t w) const {
  const auto& s = header_.spec;
  if (w > s.max_packets) throw Error(ErrorCode::OutOfBounds, "backlog exceeds table max_packets");
  if (w == 0 && (s.layout == TableLayout::SlotQueueHistoryLevel || s.w_levels != 0)) {
    throw Error(ErrorCode::OutOfBounds, "backlog 0 has no cell in a quantized queue axis");
  }
  if (s.layout == TableLayout::SlotQueueHistoryLevel) return w - 1;
  if (s.w_levels == 0) return w;
  // ceil(w * L / W) - 1 for w >= 1
  return (w * s.w_levels + s.max_packets - 1) / s.max_packets - 1;
}

Action PolicyTable::lookup(std::size_t k, std::size_t w, std::size_t idx) const {
  const auto& s = header_.spec;
  if (s.layout != TableLayout::SlotQueueBelief) {
    throw Error(ErrorCode::DimensionMismatch, "3-index lookup on a history-layout table");
  }
  if (k >= s.horizon || w > s.max_packets || idx >= s.belief_bins) {
    throw Error(ErrorCode::OutOfBounds, "table lookup out of range");
  }
  if (w == 0 && s.w_levels != 0) return Action::Defer;
  const std::uint64_t cell =
      (static_cast<std::uint64_t>(k) * queue_cells() + queue_cell(w)) * s.belief_bins + idx;
  return bit(cell) ? Action::Transmit : Action::Defer;
}

Action PolicyTable::lookup(std::size_t k, std::size_t w, std::size_t history, std::size_t level) const {
  const auto& s = header_.spec;
  if (s.layout != TableLayout::SlotQueueHistoryLevel) {
    throw Error(ErrorCode::DimensionMismatch, "4-index lookup on a 3-dim table");
  }
  if (k >= s.horizon || w > s.max_packets || history >= s.belief_bins || level >= s.w_levels) {
    throw Error(ErrorCode::OutOfBounds, "table lookup out of range");
  }
  if (w == 0) return Action::Defer;
  const std::uint64_t cell =
      ((static_cast<std::uint64_t>(k) * s.max_packets + (w - 1)) * s.belief_bins + history) *
          s.w_levels + level;
  return bit(cell) ? Action::Transmit : Action::Defer;
}

BeliefGrid PolicyTable::belief_grid() const {
  if (header_.quantizer != TableQuantizer::UniformBelief) {
    throw Error(ErrorCode::DimensionMismatch, "table is not indexed by belief");
  }
  const std::size_t size = header_.spec.layout == TableLayout::SlotQueueBelief
                               ? header_.spec.belief_bins
                               : header_.spec.w_levels;
  return grid_with_size(header_.n_states, size);
}

void PolicyTable::write(std::ostream& out) const {
  std::array<std::uint8_t, TableHeader::kSize> h{};
  std::memcpy(h.data(), TableHeader::kMagic.data(), 8);
  put_u16(h.data() + 8, header_.version);
  put_u16(h.data() + 10, header_.n_states);
  put_u32(h.data() + 12, header_.spec.horizon);
  put_u32(h.data() + 16, header_.spec.max_packets);
  put_u32(h.data() + 20, header_.spec.w_levels);
  put_u32(h.data() + 24, header_.spec.belief_bins);
  h[28] = static_cast<std::uint8_t>(header_.spec.layout);
  h[29] = static_cast<std::uint8_t>(header_.quantizer);
  std::memcpy(h.data() + 30, header_.fingerprint.data(), header_.fingerprint.size());
  out.write(reinterpret_cast<const char*>(h.data()), static_cast<std::streamsize>(h.size()));
  out.write(reinterpret_cast<const char*>(payload_.data()), static_cast<std::streamsize>(payload_.size()));
  if (!out) throw Error(ErrorCode::BadTableFile, "failed to write table");
}

PolicyTable PolicyTable::read(std::istream& in) {
  std::array<std::uint8_t, TableHeader::kSize> h{};
  in.read(reinterpret_cast<char*>(h.data()), static_cast<std::streamsize>(h.size()));
  if (in.gcount() != static_cast<std::streamsize>(h.size())) {
    throw Error(ErrorCode::BadTableFile, "truncated header");
  }
  if (std::memcmp(h.data(), TableHeader::kMagic.data(), 8) != 0) {
    throw Error(ErrorCode::BadTableFile, "bad magic");
  }
  PolicyTable table;
  auto& hd = table.header_;
  hd.version = get_u16(h.data() + 8);
  if (hd.version != TableHeader::kVersion) {
    throw Error(ErrorCode::BadTableFile, "unsupported version " + std::to_string(hd.version));
  }
  hd.n_states = get_u16(h.data() + 10);
  hd.spec.horizon = get_u32(h.data() + 12);
  hd.spec.max_packets = get_u32(h.data() + 16);
  hd.spec.w_levels = get_u32(h.data() + 20);
  hd.spec.belief_bins = get_u32(h.data() + 24);
  if (h[28] > 1 || h[29] > 2) throw Error(ErrorCode::BadTableFile, "unknown layout or quantizer id");
  hd.spec.layout = static_cast<TableLayout>(h[28]);
  hd.quantizer = static_cast<TableQuantizer>(h[29]);
  std::memcpy(hd.fingerprint.data(), h.data() + 30, hd.fingerprint.size());
  try {
    check_spec(hd.spec);
  } catch (const Error& e) {
    throw Error(ErrorCode::BadTableFile, e.what());
  }

  table.payload_.resize(hd.spec.payload_bytes());
  in.read(reinterpret_cast<char*>(table.payload_.data()),
          static_cast<std::streamsize>(table.payload_.size()));
  if (in.gcount() != static_cast<std::streamsize>(table.payload_.size())) {
    throw Error(ErrorCode::BadTableFile, "payload shorter than header dimensions");
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorCode::BadTableFile, "trailing bytes after payload");
  }
  return table;
}

void PolicyTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::BadTableFile, "cannot open " + path.string() + " for writing");
  write(out);
}

PolicyTable PolicyTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::BadTableFile, "cannot open " + path.string());
  return read(in);
}

PolicyTable compile_table(const Policy& policy, const TableSpec& spec, const ChannelModel& model) {
  if (policy.kind() != SchedulerKind::AckNak) {
    throw Error(ErrorCode::DimensionMismatch, "only AckNak policies compile to belief tables");
  }
  check_spec(spec);
  if (spec.horizon > policy.horizon() || spec.max_packets > policy.max_packets()) {
    throw Error(ErrorCode::DimensionMismatch, "table dimensions exceed the policy's");
  }
  if (policy.grid()->n_states() != model.n_states()) {
    throw Error(ErrorCode::DimensionMismatch, "policy was solved for a different channel");
  }
  const BeliefGrid& source = *policy.grid();
  const std::size_t offset = policy.horizon() - spec.horizon;

  PolicyTable table;
  table.header_.n_states = static_cast<std::uint16_t>(model.n_states());
  table.header_.spec = spec;
  table.header_.quantizer = TableQuantizer::UniformBelief;
  table.header_.fingerprint = channel_fingerprint(model);
  table.payload_.assign(spec.payload_bytes(), 0);

  if (spec.layout == TableLayout::SlotQueueBelief) {
    if (spec.belief_bins > source.size()) {
      throw Error(ErrorCode::DimensionMismatch, "table has more belief bins than the policy grid");
    }
    const BeliefGrid grid = grid_with_size(model.n_states(), spec.belief_bins);
    std::vector<std::size_t> source_index(spec.belief_bins);
    for (std::size_t b = 0; b < spec.belief_bins; ++b) {
      source_index[b] = source.quantize(grid.dequantize(b));
    }
    const std::size_t Q = table.queue_cells();
    std::vector<std::size_t> backlog(Q);
    for (std::size_t q = 0; q < Q; ++q) {
      backlog[q] = spec.w_levels == 0 ? q : queue_cell_center(q, spec.max_packets, spec.w_levels);
    }
    std::uint64_t cell = 0;
    for (std::size_t k = 0; k < spec.horizon; ++k) {
      for (std::size_t q = 0; q < Q; ++q) {
        for (std::size_t b = 0; b < spec.belief_bins; ++b, ++cell) {
          if (backlog[q] > 0 &&
              policy.action(k + offset, backlog[q], source_index[b]) == Action::Transmit) {
            table.set_bit(cell);
          }
        }
      }
    }
    return table;
  }

  // History layout: the belief for (pattern, level) is the anchor belief of
  // `level` updated by the pattern's outcomes, oldest first.
  const std::size_t H = history_length(spec.belief_bins);
  const BeliefGrid levels = grid_with_size(model.n_states(), spec.w_levels);
  std::vector<std::size_t> source_index(static_cast<std::size_t>(spec.belief_bins) * spec.w_levels);
  for (std::size_t h = 0; h < spec.belief_bins; ++h) {
    for (std::size_t l = 0; l < spec.w_levels; ++l) {
      Belief b = levels.dequantize(l);
      for (std::size_t j = H; j-- > 0;) b = apply_outcome(b, model, (h >> j) & 1u);
      source_index[h * spec.w_levels + l] = source.quantize(b);
    }
  }
  std::uint64_t cell = 0;
  const std::size_t inner = source_index.size();
  for (std::size_t k = 0; k < spec.horizon; ++k) {
    for (std::size_t w = 1; w <= spec.max_packets; ++w) {
      for (std::size_t i = 0; i < inner; ++i, ++cell) {
        if (policy.action(k + offset, w, source_index[i]) == Action::Transmit) table.set_bit(cell);
      }
    }
  }
  return table;
}

PolicyTable compile_dense(const Policy& policy, const ChannelModel& model) {
  PolicyTable table;
  auto& hd = table.header_;
  hd.n_states = static_cast<std::uint16_t>(model.n_states());
  hd.fingerprint = channel_fingerprint(model);
  switch (policy.kind()) {
    case SchedulerKind::AckNak:
      hd.quantizer = TableQuantizer::UniformBelief;
      break;
    case SchedulerKind::CausalCSI:
      hd.quantizer = policy.timing() == CsiTiming::Current ? TableQuantizer::ChannelState
                                                           : TableQuantizer::DelayedState;
      break;
    default:
      throw Error(ErrorCode::DimensionMismatch, "only solved DP policies have a dense table");
  }
  if (policy.kind() == SchedulerKind::AckNak && policy.grid()->n_states() != model.n_states()) {
    throw Error(ErrorCode::DimensionMismatch, "policy was solved for a different channel");
  }
  hd.spec.horizon = static_cast<std::uint32_t>(policy.horizon());
  hd.spec.max_packets = static_cast<std::uint32_t>(policy.max_packets());
  hd.spec.w_levels = 0;
  hd.spec.belief_bins = static_cast<std::uint32_t>(policy.info_size());
  hd.spec.layout = TableLayout::SlotQueueBelief;
  table.payload_.assign(hd.spec.payload_bytes(), 0);

  std::uint64_t cell = 0;
  for (std::size_t k = 0; k < policy.horizon(); ++k) {
    for (std::size_t w = 0; w <= policy.max_packets(); ++w) {
      for (std::size_t i = 0; i < policy.info_size(); ++i, ++cell) {
        if (policy.action(k, w, i) == Action::Transmit) table.set_bit(cell);
      }
    }
  }
  return table;
}

}  // namespace fsmc
