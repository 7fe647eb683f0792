#pragma once

// Random linear fountain over GF(2): encoding, packet superposition and
// incremental Gaussian-elimination decoding for blocks of K packets.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ncfountain/bitvector.hpp"
#include "ncfountain/errors.hpp"
#include "ncfountain/random.hpp"

namespace ncfountain {

inline constexpr std::size_t kDefaultPacketBits = 1024;
inline constexpr std::size_t kDefaultHeaderBits = 16;

/// K source packets of m bits each.
class SourceBlock {
 public:
  SourceBlock(std::uint64_t index, std::vector<BitVector> packets)
      : index_(index), packets_(std::move(packets)) {
    if (packets_.empty()) throw DomainError("SourceBlock needs at least one packet");
    const std::size_t m = packets_.front().size();
    for (const auto& p : packets_)
      if (p.size() != m) throw DomainError("SourceBlock packets must all have the same length");
  }

  static SourceBlock random(std::size_t K, std::size_t m, std::uint64_t index, Rng& rng) {
    std::vector<BitVector> packets;
    packets.reserve(K);
    for (std::size_t k = 0; k < K; ++k) packets.push_back(BitVector::random(m, rng));
    return SourceBlock(index, std::move(packets));
  }

  std::uint64_t index() const noexcept { return index_; }
  std::size_t K() const noexcept { return packets_.size(); }
  std::size_t packet_bits() const noexcept { return packets_.front().size(); }
  const BitVector& packet(std::size_t k) const { return packets_.at(k); }
  const std::vector<BitVector>& packets() const noexcept { return packets_; }

  /// XOR of the packets selected by `coeffs`.
  BitVector combine(const BitVector& coeffs) const {
    if (coeffs.size() != K()) throw DomainError("coefficient vector length differs from K");
    BitVector out(packet_bits());
    if (out.size() == 0) return out;
    for (std::size_t k = coeffs.find_first(); k != BitVector::npos; k = coeffs.find_next(k + 1))
      out ^= packets_[k];
    return out;
  }

  friend bool operator==(const SourceBlock&, const SourceBlock&) = default;

 private:
  std::uint64_t index_;
  std::vector<BitVector> packets_;
};

enum class Sender { source, relay };

/// Occupancy of the two per-packet header fields: h1 is written only by the
/// source, h2 only by a relay. A receiver learns which constituents of a
/// superposed packet survived from these flags.
struct HeaderFlags {
  bool h1 = false;
  bool h2 = false;

  friend bool operator==(const HeaderFlags&, const HeaderFlags&) = default;
};

/// A fountain-coded packet. `block_index` is the block i that coeffs_current
/// refers to; coeffs_next, when present, refers to block i + 1. Coefficient
/// vectors travel as explicit metadata outside the m-bit payload.
struct CodedPacket {
  std::uint64_t block_index = 0;
  BitVector payload;
  std::optional<BitVector> coeffs_current;
  std::optional<BitVector> coeffs_next;
  HeaderFlags header;

  bool is_network_coded() const noexcept { return coeffs_current && coeffs_next; }
  bool is_pure_current() const noexcept { return coeffs_current && !coeffs_next; }
  bool is_pure_next() const noexcept { return !coeffs_current && coeffs_next; }

  friend bool operator==(const CodedPacket&, const CodedPacket&) = default;
};

/// Degree distribution of the random linear fountain: rho(0) = 0 and
/// rho(d) = C(K, d) / (2^K - 1).
inline double degree_pmf(std::size_t K, std::size_t d) {
  if (K == 0) throw DomainError("degree_pmf: K must be positive");
  if (d > K) throw DomainError("degree_pmf: degree exceeds K");
  if (d == 0) return 0.0;
  const double kd = static_cast<double>(K);
  const double dd = static_cast<double>(d);
  const double log_choose = std::lgamma(kd + 1) - std::lgamma(dd + 1) - std::lgamma(kd - dd + 1);
  // 2^K - 1 = 2^K (1 - 2^-K)
  const double log_denominator = kd * std::log(2.0) + std::log1p(-std::exp2(-kd));
  return std::exp(log_choose - log_denominator);
}

namespace detail {
inline HeaderFlags header_for(Sender sender) {
  return sender == Sender::source ? HeaderFlags{true, false} : HeaderFlags{false, true};
}
}  // namespace detail

/// Draws a coefficient vector with independent fair bits (the all-zero vector
/// included) and returns the combination of the selected packets.
inline CodedPacket encode(const SourceBlock& block, Rng& rng, Sender sender = Sender::source) {
  BitVector coeffs = BitVector::random(block.K(), rng);
  CodedPacket pkt;
  pkt.block_index = block.index();
  pkt.payload = block.combine(coeffs);
  pkt.coeffs_current = std::move(coeffs);
  pkt.header = detail::header_for(sender);
  return pkt;
}

/// Same draw as encode(), but labelled as the next-block contribution of a
/// packet whose current block is `next_block.index() - 1`.
inline CodedPacket encode_next(const SourceBlock& next_block, Rng& rng) {
  if (next_block.index() == 0) throw DomainError("encode_next: block 0 has no predecessor");
  CodedPacket pkt = encode(next_block, rng, Sender::source);
  pkt.block_index = next_block.index() - 1;
  pkt.coeffs_next = std::move(pkt.coeffs_current);
  pkt.coeffs_current.reset();
  return pkt;
}

/// current XOR next, as sent by the source during phase two.
inline CodedPacket network_code(const CodedPacket& current, const CodedPacket& next) {
  if (!current.is_pure_current())
    throw std::invalid_argument("network_code: first operand must carry only a current-block code");
  if (!next.is_pure_next())
    throw std::invalid_argument("network_code: second operand must carry only a next-block code");
  if (current.block_index != next.block_index)
    throw std::invalid_argument("network_code: operands refer to different blocks");
  if (current.payload.size() != next.payload.size())
    throw std::invalid_argument("network_code: payload lengths differ");
  CodedPacket out;
  out.block_index = current.block_index;
  out.payload = current.payload ^ next.payload;
  out.coeffs_current = current.coeffs_current;
  out.coeffs_next = next.coeffs_next;
  out.header = HeaderFlags{true, false};
  return out;
}

namespace detail {
/// Sum of two optional coefficient vectors. Two present vectors that cancel
/// leave no contribution from that block.
inline std::optional<BitVector> merge_coeffs(const std::optional<BitVector>& a,
                                             const std::optional<BitVector>& b) {
  if (!a) return b;
  if (!b) return a;
  BitVector sum = *a ^ *b;
  if (sum.none()) return std::nullopt;
  return sum;
}
}  // namespace detail

/// The packet a receiver sees when the source and relay transmit in the same
/// slot over erasure links: the XOR of whichever constituents were not erased.
inline std::optional<CodedPacket> superpose(const std::optional<CodedPacket>& from_source,
                                            const std::optional<CodedPacket>& from_relay) {
  if (!from_source) return from_relay;
  if (!from_relay) return from_source;
  const CodedPacket& s = *from_source;
  const CodedPacket& r = *from_relay;
  if (s.block_index != r.block_index)
    throw std::invalid_argument("superpose: constituents refer to different blocks");
  CodedPacket out;
  out.block_index = s.block_index;
  out.payload = s.payload ^ r.payload;
  out.coeffs_current = detail::merge_coeffs(s.coeffs_current, r.coeffs_current);
  out.coeffs_next = detail::merge_coeffs(s.coeffs_next, r.coeffs_next);
  out.header = HeaderFlags{s.header.h1 || r.header.h1, s.header.h2 || r.header.h2};
  return out;
}

/// Incremental GF(2) elimination for one block. Rows are kept in echelon form
/// keyed by their lowest set bit; payloads follow every row operation.
class DecoderState {
 public:
  DecoderState(std::size_t K, std::size_t payload_bits, std::uint64_t block_index = 0)
      : K_(K), payload_bits_(payload_bits), block_index_(block_index), pivot_row_(K, kNoRow) {
    if (K == 0) throw DomainError("DecoderState: K must be positive");
  }

  /// Returns true iff `coeffs` was independent of everything absorbed so far.
  bool absorb(const BitVector& coeffs, const BitVector& payload) {
    if (coeffs.size() != K_) throw std::invalid_argument("absorb: coefficient length differs from K");
    if (payload.size() != payload_bits_)
      throw std::invalid_argument("absorb: payload length differs from m");
    ++received_;
    scratch_coeffs_ = coeffs;
    scratch_payload_ = payload;
    for (std::size_t bit = scratch_coeffs_.find_first(); bit != BitVector::npos;
         bit = scratch_coeffs_.find_next(bit + 1)) {
      const std::size_t row = pivot_row_[bit];
      if (row == kNoRow) {
        pivot_row_[bit] = rows_.size();
        rows_.push_back(Row{std::move(scratch_coeffs_), std::move(scratch_payload_)});
        return true;
      }
      scratch_coeffs_.xor_tail(rows_[row].coeffs, bit / BitVector::word_bits);
      scratch_payload_ ^= rows_[row].payload;
    }
    return false;
  }

  std::size_t K() const noexcept { return K_; }
  std::size_t payload_bits() const noexcept { return payload_bits_; }
  std::uint64_t block_index() const noexcept { return block_index_; }
  std::size_t rank() const noexcept { return rows_.size(); }
  /// Number of absorb() calls, independent or not.
  std::size_t received() const noexcept { return received_; }
  bool decodable() const noexcept { return rows_.size() == K_; }

  /// The K source packets by back substitution, or nullopt while rank < K.
  std::optional<SourceBlock> decode() const {
    if (!decodable()) return std::nullopt;
    std::vector<BitVector> solved(K_);
    for (std::size_t p = K_; p-- > 0;) {
      const Row& row = rows_[pivot_row_[p]];
      BitVector value = row.payload;
      for (std::size_t q = row.coeffs.find_next(p + 1); q != BitVector::npos;
           q = row.coeffs.find_next(q + 1))
        value ^= solved[q];
      solved[p] = std::move(value);
    }
    return SourceBlock(block_index_, std::move(solved));
  }

 private:
  static constexpr std::size_t kNoRow = static_cast<std::size_t>(-1);

  struct Row {
    BitVector coeffs;
    BitVector payload;
  };

  std::size_t K_;
  std::size_t payload_bits_;
  std::uint64_t block_index_;
  std::size_t received_ = 0;
  std::vector<std::size_t> pivot_row_;
  std::vector<Row> rows_;
  BitVector scratch_coeffs_;
  BitVector scratch_payload_;
};

/// Removes the contribution of an already decoded block from a network-coded
/// packet, leaving a pure next-block packet.
inline CodedPacket strip_known(const CodedPacket& mixed, const SourceBlock& decoded_block) {
  if (!mixed.coeffs_next)
    throw std::invalid_argument("strip_known: packet has no next-block contribution");
  if (mixed.block_index != decoded_block.index())
    throw std::invalid_argument("strip_known: decoded block " + std::to_string(decoded_block.index()) +
                                " does not match packet block " + std::to_string(mixed.block_index));
  CodedPacket out = mixed;
  if (mixed.coeffs_current) {
    out.payload ^= decoded_block.combine(*mixed.coeffs_current);
    out.coeffs_current.reset();
  }
  return out;
}

}  // namespace ncfountain
