#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "fsmc/belief.hpp"
#include "fsmc/channel.hpp"
#include "fsmc/dp.hpp"

namespace fsmc {

/// Cell arrangement of a packed table. Both are slot-major.
///
///  SlotQueueBelief (id 0): (slot, queue cell, belief bin). The queue axis is
///    exact (max_packets + 1 cells) when w_levels == 0, otherwise w_levels
///    uniform cells over 1..max_packets with backlog 0 short-circuited to Defer.
///  SlotQueueHistoryLevel (id 1): (slot, backlog 1..max_packets, ACK/NAK
///    history pattern, belief level). belief_bins counts history patterns
///    (a power of two; the pattern holds the last log2(belief_bins)
///    transmission outcomes, newest in bit 0, Ack = 1) and w_levels counts
///    quantized belief levels of the anchor belief the pattern is applied to.
enum class TableLayout : std::uint8_t { SlotQueueBelief = 0, SlotQueueHistoryLevel = 1 };

/// What the information index of a table means.
enum class TableQuantizer : std::uint8_t {
  UniformBelief = 0,  // BeliefGrid over the channel states
  ChannelState = 1,   // current channel state (causal CSI)
  DelayedState = 2,   // previous channel state, last index = no state seen yet
};

struct TableSpec {
  std::uint32_t belief_bins = 0;
  std::uint32_t w_levels = 0;
  std::uint32_t max_packets = 0;
  std::uint32_t horizon = 0;
  TableLayout layout = TableLayout::SlotQueueBelief;

  std::uint64_t payload_bits() const;
  std::uint64_t payload_bytes() const { return (payload_bits() + 7) / 8; }

  friend bool operator==(const TableSpec&, const TableSpec&) = default;
};

using Fingerprint = std::array<std::uint8_t, 32>;

/// SHA-256 over n_states (u16 LE) followed by the transition matrix and the
/// loss vector as little-endian IEEE-754 doubles.
Fingerprint channel_fingerprint(const ChannelModel& model);

/// On-disk header, 64 bytes, all integers little-endian:
///   0  magic "FSMCTBL1"      8  u16 version     10 u16 n_states
///   12 u32 horizon           16 u32 max_packets 20 u32 w_levels
///   24 u32 belief_bins       28 u8 layout       29 u8 quantizer
///   30 fingerprint[32]       62 2 reserved zero bytes
/// The payload follows immediately: cell c lives in byte c / 8, bit c % 8.
struct TableHeader {
  static constexpr std::array<char, 8> kMagic{'F', 'S', 'M', 'C', 'T', 'B', 'L', '1'};
  static constexpr std::uint16_t kVersion = 1;
  static constexpr std::size_t kSize = 64;

  std::uint16_t version = kVersion;
  std::uint16_t n_states = 0;
  TableSpec spec;
  TableQuantizer quantizer = TableQuantizer::UniformBelief;
  Fingerprint fingerprint{};

  friend bool operator==(const TableHeader&, const TableHeader&) = default;
};

class PolicyTable {
 public:
  const TableHeader& header() const noexcept { return header_; }
  const TableSpec& spec() const noexcept { return header_.spec; }
  std::span<const std::uint8_t> payload() const noexcept { return payload_; }
  std::size_t file_size() const noexcept { return TableHeader::kSize + payload_.size(); }

  /// Queue-axis cell for backlog w (SlotQueueBelief layout).
  std::size_t queue_cell(std::size_t w) const;
  std::size_t queue_cells() const;

  /// SlotQueueBelief lookup.
  Action lookup(std::size_t k, std::size_t w, std::size_t idx) const;
  /// SlotQueueHistoryLevel lookup.
  Action lookup(std::size_t k, std::size_t w, std::size_t history, std::size_t level) const;

  /// Belief quantizer matching the table's information axis (UniformBelief
  /// tables only).
  BeliefGrid belief_grid() const;

  void write(std::ostream& out) const;
  static PolicyTable read(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static PolicyTable load(const std::filesystem::path& path);

  friend bool operator==(const PolicyTable&, const PolicyTable&) = default;

 private:
  friend PolicyTable compile_table(const Policy&, const TableSpec&, const ChannelModel&);
  friend PolicyTable compile_dense(const Policy&, const ChannelModel&);

  bool bit(std::uint64_t cell) const { return (payload_[cell >> 3] >> (cell & 7)) & 1u; }
  void set_bit(std::uint64_t cell) { payload_[cell >> 3] |= static_cast<std::uint8_t>(1u << (cell & 7)); }

  TableHeader header_;
  std::vector<std::uint8_t> payload_;
};

/// Compile an AckNak policy into a packed table. Each cell holds the policy's
/// action at the cell's representative (slot, backlog, belief). When the table
/// horizon is shorter than the policy's, table slot k reads policy slot
/// k + (policy horizon - table horizon) so remaining time matches.
PolicyTable compile_table(const Policy& policy, const TableSpec& spec, const ChannelModel& model);

/// Lossless table of a solved CausalCSI or AckNak policy: exact backlog axis,
/// one column per information index.
PolicyTable compile_dense(const Policy& policy, const ChannelModel& model);

/// BeliefGrid with exactly `size` indices for an n-state channel; throws
/// DimensionMismatch when no uniform grid has that many points.
BeliefGrid grid_with_size(std::size_t n_states, std::size_t size);

}  // namespace fsmc
