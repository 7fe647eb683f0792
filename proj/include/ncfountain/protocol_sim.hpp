#pragma once

// Packet-level Monte Carlo simulation of direct transmission, naive relaying
// and network-coded relaying. Every node runs a real GF(2) decoder; the
// channel is a policy so the same protocol logic serves ideal erasure links
// and fading links mapped to erasures.

#include <algorithm>
#include <array>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ncfountain/erasure_analysis.hpp"
#include "ncfountain/errors.hpp"
#include "ncfountain/gf2_fountain.hpp"
#include "ncfountain/random.hpp"
#include "ncfountain/stats.hpp"

namespace ncfountain {

enum class Scheme { direct, naive, netcoded };

inline const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::direct: return "direct";
    case Scheme::naive: return "naive";
    case Scheme::netcoded: return "netcoded";
  }
  return "?";
}

enum class Link { sd, sr, rd, rr };

/// Receivers that listen to the simultaneous source + relay transmissions of
/// phase two.
enum class Receiver { destination, idle_relay };

/// Which constituents of a phase-two slot a receiver recovered.
struct Phase2Reception {
  bool from_source = false;
  bool from_relay = false;
};

enum class BufferTarget { buffer1, buffer2, buffer3, discard };

/// Stores a receiver makes in one phase-two slot. Erasure links yield at most
/// one; fading links with successive decoding can yield buffer1 and buffer3
/// together.
struct BufferTargets {
  bool buffer1 = false;
  bool buffer2 = false;
  bool buffer3 = false;

  bool discard() const noexcept { return !buffer1 && !buffer2 && !buffer3; }
  friend bool operator==(const BufferTargets&, const BufferTargets&) = default;
};

/// Buffer choice at a phase-two receiver of the erasure network.
inline BufferTarget classify_phase2(bool source_erased, bool relay_erased) {
  if (source_erased && relay_erased) return BufferTarget::discard;
  if (source_erased) return BufferTarget::buffer1;
  if (relay_erased) return BufferTarget::buffer2;
  return BufferTarget::buffer3;
}

/// Buffer a received (possibly superposed) packet belongs in, from its
/// coefficient structure alone.
inline BufferTarget buffer_for(const std::optional<CodedPacket>& pkt) {
  if (!pkt) return BufferTarget::discard;
  if (pkt->is_network_coded()) return BufferTarget::buffer2;
  if (pkt->is_pure_next()) return BufferTarget::buffer3;
  return BufferTarget::buffer1;
}

template <class C>
concept ChannelModel = requires(const C& c, Rng& rng, Link link, Receiver rx) {
  { c.erased(link, rng) } -> std::same_as<bool>;
  { c.phase2(rx, rng) } -> std::same_as<Phase2Reception>;
  { c.phase2_targets(Phase2Reception{}) } -> std::same_as<BufferTargets>;
};

/// Independent erasures on every link; a slot in which both phase-two
/// constituents survive arrives as their XOR.
struct ErasureChannel {
  ErasureNetworkParams params;

  double pe(Link link) const {
    switch (link) {
      case Link::sd: return params.pe_sd;
      case Link::sr: return params.pe_sr;
      case Link::rd: return params.pe_rd;
      case Link::rr: return params.pe_rr;
    }
    return 1.0;
  }

  bool erased(Link link, Rng& rng) const { return rng.bernoulli(pe(link)); }

  Phase2Reception phase2(Receiver rx, Rng& rng) const {
    const bool at_d = rx == Receiver::destination;
    const bool s_ok = !erased(at_d ? Link::sd : Link::sr, rng);
    const bool r_ok = !erased(at_d ? Link::rd : Link::rr, rng);
    return {s_ok, r_ok};
  }

  BufferTargets phase2_targets(Phase2Reception rec) const {
    switch (classify_phase2(!rec.from_source, !rec.from_relay)) {
      case BufferTarget::buffer1: return {true, false, false};
      case BufferTarget::buffer2: return {false, true, false};
      case BufferTarget::buffer3: return {false, false, true};
      case BufferTarget::discard: break;
    }
    return {};
  }
};

struct SimConfig {
  ErasureNetworkParams params;
  std::size_t m = kDefaultPacketBits;   ///< payload bits per packet
  std::size_t mu = kDefaultHeaderBits;  ///< bits per header field
  std::size_t n_blocks = 1;             ///< consecutive blocks per network-coded trial
  std::size_t burn_in = 0;              ///< leading blocks left out of batch statistics
  /// Carry real m-bit payloads and check every decode bit-exactly. Off, the
  /// simulator tracks coefficient vectors only; the slot-level randomness is
  /// identical either way.
  bool carry_payload = false;
  std::uint64_t seed = 0;

  std::size_t slot_cap() const { return 100 * params.K; }

  void validate() const {
    params.validate();
    if (n_blocks == 0) throw ConfigError("n_blocks must be at least 1");
    if (burn_in >= n_blocks && n_blocks > 1) throw ConfigError("burn_in must be smaller than n_blocks");
  }
};

struct BufferCounts {
  std::uint64_t buffer1 = 0;
  std::uint64_t buffer2 = 0;
  std::uint64_t buffer3 = 0;
  std::uint64_t discard = 0;

  void add(const BufferTargets& t) {
    if (t.discard()) ++discard;
    buffer1 += t.buffer1;
    buffer2 += t.buffer2;
    buffer3 += t.buffer3;
  }
  BufferCounts& operator+=(const BufferCounts& o) {
    buffer1 += o.buffer1;
    buffer2 += o.buffer2;
    buffer3 += o.buffer3;
    discard += o.discard;
    return *this;
  }
  std::uint64_t slots_with_store() const { return buffer1 + buffer2 + buffer3; }
  friend bool operator==(const BufferCounts&, const BufferCounts&) = default;
};

struct BlockRecord {
  std::size_t M = 0;  ///< slots until D decoded this block
  std::size_t j = 0;  ///< phase-one length (M when D decoded first)
  int first_relay = -1;  ///< label of the relay that ended phase one, -1 if none
  CarryoverState carry_in;      ///< raw next-block packet counts entering the block
  std::size_t carry_in_rank_d = 0;  ///< rank of the destination's carried packets
  bool idle_relay_decoded = false;
  CarryoverState carry_out;
  BufferCounts d_buffers;
  BufferCounts idle_buffers;
};

struct TrialRecord {
  std::vector<BlockRecord> blocks;
};

namespace detail {

inline void require_slot(std::size_t slot, const SimConfig& cfg, const char* where) {
  if (slot > cfg.slot_cap())
    throw RunawayError(std::string(where) + ": block exceeded " + std::to_string(cfg.slot_cap()) +
                           " slots",
                       cfg.slot_cap());
}

struct Streams {
  explicit Streams(std::uint64_t seed)
      : channel(seed), data(channel.fork_seed()), source_code(channel.fork_seed()) {}

  Rng channel;      ///< erasures and fading
  Rng data;         ///< source payload bits
  Rng source_code;  ///< phase-one coefficient draws
};

inline SourceBlock make_block(const SimConfig& cfg, std::uint64_t index, Rng& data) {
  const std::size_t bits = cfg.carry_payload ? cfg.m : 0;
  return SourceBlock::random(cfg.params.K, bits, index, data);
}

inline std::size_t payload_bits(const SimConfig& cfg) { return cfg.carry_payload ? cfg.m : 0; }

inline void absorb_current(DecoderState& dec, const CodedPacket& pkt) {
  dec.absorb(*pkt.coeffs_current, pkt.payload);
}

inline void absorb_next(DecoderState& dec, const CodedPacket& pkt) {
  dec.absorb(*pkt.coeffs_next, pkt.payload);
}

inline SourceBlock checked_decode(const DecoderState& dec, const SourceBlock& truth, const SimConfig& cfg) {
  std::optional<SourceBlock> out = dec.decode();
  if (!out) throw std::logic_error("decode requested before full rank");
  if (cfg.carry_payload && *out != truth)
    throw std::logic_error("decoded block " + std::to_string(truth.index()) + " differs from source");
  return std::move(*out);
}

}  // namespace detail

/// Slots until the destination decodes one block sent straight from the source.
template <ChannelModel Channel>
std::size_t simulate_direct(const SimConfig& cfg, const Channel& ch, std::uint64_t seed) {
  cfg.validate();
  detail::Streams rs(seed);
  const SourceBlock block = detail::make_block(cfg, 0, rs.data);
  DecoderState d(cfg.params.K, detail::payload_bits(cfg), 0);
  std::size_t slot = 0;
  while (!d.decodable()) {
    detail::require_slot(++slot, cfg, "simulate_direct");
    const CodedPacket pkt = encode(block, rs.source_code);
    if (!ch.erased(Link::sd, rs.channel)) detail::absorb_current(d, pkt);
  }
  detail::checked_decode(d, block, cfg);
  return slot;
}

inline std::size_t simulate_direct(const SimConfig& cfg, std::uint64_t seed) {
  return simulate_direct(cfg, ErasureChannel{cfg.params}, seed);
}

/// One block of two-phase relaying: the source broadcasts until any relay
/// decodes, then that relay alone sends fresh coded packets until D decodes.
template <ChannelModel Channel>
TrialRecord simulate_naive(const SimConfig& cfg, const Channel& ch, std::uint64_t seed) {
  cfg.validate();
  const std::size_t K = cfg.params.K;
  const std::size_t bits = detail::payload_bits(cfg);
  detail::Streams rs(seed);
  const SourceBlock block = detail::make_block(cfg, 0, rs.data);

  DecoderState d(K, bits, 0);
  std::vector<DecoderState> relays(cfg.params.relays, DecoderState(K, bits, 0));
  BlockRecord rec;
  std::size_t slot = 0;
  int first = -1;
  while (first < 0) {
    detail::require_slot(++slot, cfg, "simulate_naive");
    const CodedPacket pkt = encode(block, rs.source_code);
    for (auto& r : relays)
      if (!ch.erased(Link::sr, rs.channel)) detail::absorb_current(r, pkt);
    if (!ch.erased(Link::sd, rs.channel)) detail::absorb_current(d, pkt);
    if (d.decodable()) break;
    // Highest label wins a tie, as in the two-relay convention.
    for (std::size_t i = relays.size(); i-- > 0;)
      if (relays[i].decodable()) {
        first = static_cast<int>(i);
        break;
      }
  }
  rec.j = slot;
  rec.first_relay = first;
  if (first >= 0) {
    detail::checked_decode(relays[static_cast<std::size_t>(first)], block, cfg);
    Rng relay_code(rs.channel.fork_seed());
    while (!d.decodable()) {
      detail::require_slot(++slot, cfg, "simulate_naive");
      const CodedPacket pkt = encode(block, relay_code, Sender::relay);
      if (!ch.erased(Link::rd, rs.channel)) detail::absorb_current(d, pkt);
    }
  }
  detail::checked_decode(d, block, cfg);
  rec.M = slot;
  return TrialRecord{{rec}};
}

inline TrialRecord simulate_naive(const SimConfig& cfg, std::uint64_t seed) {
  return simulate_naive(cfg, ErasureChannel{cfg.params}, seed);
}

namespace detail {

/// Per-node state of the network-coded protocol: a decoder for the current
/// block, one for the next block, and the buffer of mixed packets waiting for
/// the current block to decode.
struct NcNode {
  NcNode(std::size_t K, std::size_t bits, std::uint64_t block)
      : current(K, bits, block), next(K, bits, block + 1) {}

  DecoderState current;
  DecoderState next;
  std::vector<CodedPacket> mixed;

  void store(const BufferTargets& t, const CodedPacket& from_s, const CodedPacket& from_r) {
    if (t.buffer1) absorb_current(current, from_r);
    if (t.buffer2) mixed.push_back(from_s);
    if (t.buffer3) {
      const std::optional<CodedPacket> sum = superpose(from_s, from_r);
      absorb_next(next, *sum);
    }
  }

  /// Strips every mixed packet with the decoded current block into `next`.
  void resolve_mixed(const SourceBlock& decoded) {
    for (const auto& pkt : mixed) absorb_next(next, strip_known(pkt, decoded));
    mixed.clear();
  }
};

}  // namespace detail

/// n_blocks consecutive blocks of the network-coded scheme (two relays).
/// During phase two the successful relay sends current-block packets while the
/// source sends the XOR of an identical current-block packet and a next-block
/// packet. D and the idle relay sort what they receive into three buffers;
/// next-block packets carry over into the following block.
template <ChannelModel Channel>
TrialRecord simulate_netcoded(const SimConfig& cfg, const Channel& ch, std::uint64_t seed) {
  cfg.validate();
  if (cfg.params.relays != 2) throw ConfigError("network-coded scheme is defined for two relays");
  const std::size_t K = cfg.params.K;
  const std::size_t bits = detail::payload_bits(cfg);
  detail::Streams rs(seed);

  SourceBlock current = detail::make_block(cfg, 0, rs.data);
  SourceBlock upcoming = detail::make_block(cfg, 1, rs.data);
  detail::NcNode dest(K, bits, 0);
  std::array<detail::NcNode, 2> relay{detail::NcNode(K, bits, 0), detail::NcNode(K, bits, 0)};

  TrialRecord trial;
  trial.blocks.reserve(cfg.n_blocks);
  for (std::size_t b = 0; b < cfg.n_blocks; ++b) {
    BlockRecord rec;
    rec.carry_in = {relay[0].current.received(), relay[1].current.received(), dest.current.received()};
    rec.carry_in_rank_d = dest.current.rank();

    std::size_t slot = 0;
    int first = -1;
    bool d_done = dest.current.decodable();
    auto pick_first = [&] {
      if (relay[1].current.decodable()) return 1;
      if (relay[0].current.decodable()) return 0;
      return -1;
    };
    if (!d_done) first = pick_first();
    while (!d_done && first < 0) {
      detail::require_slot(++slot, cfg, "simulate_netcoded");
      const CodedPacket pkt = encode(current, rs.source_code);
      for (auto& r : relay)
        if (!ch.erased(Link::sr, rs.channel)) detail::absorb_current(r.current, pkt);
      if (!ch.erased(Link::sd, rs.channel)) detail::absorb_current(dest.current, pkt);
      d_done = dest.current.decodable();
      if (!d_done) first = pick_first();
    }
    rec.j = slot;
    rec.first_relay = d_done ? -1 : first;

    if (!d_done) {
      const std::size_t tx = static_cast<std::size_t>(first);
      detail::NcNode& idle = relay[1 - tx];
      detail::checked_decode(relay[tx].current, current, cfg);
      // S and the successful relay draw the same current-block codes.
      const std::uint64_t shared = rs.channel.fork_seed();
      Rng source_current(shared);
      Rng relay_current(shared);
      Rng source_next(rs.channel.fork_seed());
      while (!dest.current.decodable()) {
        detail::require_slot(++slot, cfg, "simulate_netcoded");
        const CodedPacket c_s = encode(current, source_current, Sender::source);
        const CodedPacket c_r = encode(current, relay_current, Sender::relay);
        const CodedPacket from_s = network_code(c_s, encode_next(upcoming, source_next));

        const BufferTargets at_d = ch.phase2_targets(ch.phase2(Receiver::destination, rs.channel));
        const BufferTargets at_idle = ch.phase2_targets(ch.phase2(Receiver::idle_relay, rs.channel));
        rec.d_buffers.add(at_d);
        rec.idle_buffers.add(at_idle);
        dest.store(at_d, from_s, c_r);
        idle.store(at_idle, from_s, c_r);
      }
      dest.resolve_mixed(detail::checked_decode(dest.current, current, cfg));
      rec.idle_relay_decoded = idle.current.decodable();
      if (rec.idle_relay_decoded)
        idle.resolve_mixed(detail::checked_decode(idle.current, current, cfg));
      else
        idle.mixed.clear();
    } else {
      detail::checked_decode(dest.current, current, cfg);
    }
    rec.M = slot;

    // Hand over to the next block. The relay that transmitted heard nothing
    // about it and becomes R1; the idle relay keeps its next-block packets as R2.
    const std::uint64_t nb = current.index() + 1;
    if (d_done) {
      dest = detail::NcNode(K, bits, nb);
      relay = {detail::NcNode(K, bits, nb), detail::NcNode(K, bits, nb)};
    } else {
      const std::size_t tx = static_cast<std::size_t>(first);
      detail::NcNode carried_idle(K, bits, nb);
      carried_idle.current = std::move(relay[1 - tx].next);
      detail::NcNode carried_dest(K, bits, nb);
      carried_dest.current = std::move(dest.next);
      relay = {detail::NcNode(K, bits, nb), std::move(carried_idle)};
      dest = std::move(carried_dest);
    }
    rec.carry_out = {relay[0].current.received(), relay[1].current.received(), dest.current.received()};
    trial.blocks.push_back(rec);

    current = std::move(upcoming);
    upcoming = detail::make_block(cfg, nb + 1, rs.data);
  }
  return trial;
}

inline TrialRecord simulate_netcoded(const SimConfig& cfg, std::uint64_t seed) {
  return simulate_netcoded(cfg, ErasureChannel{cfg.params}, seed);
}

// ---------------------------------------------------------------------------
// Batches

struct BatchResult {
  Scheme scheme = Scheme::direct;
  std::size_t trials = 0;
  Histogram histogram;          ///< M over all counted blocks
  Summary summary;              ///< of the same samples
  std::vector<double> samples;  ///< counted M values, trial-major order
  std::vector<double> per_block_mean;  ///< mean M by block index (multi-block runs)
  BufferCounts d_buffers;       ///< destination phase-two stores over all blocks
};

namespace detail {

template <class Fn>
void parallel_trials(std::size_t trials, unsigned threads, Fn&& run_one) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(trials)));
  if (threads == 1) {
    for (std::size_t t = 0; t < trials; ++t) run_one(t);
    return;
  }
  std::vector<std::exception_ptr> errors(trials);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t t = w; t < trials; t += threads) {
        try {
          run_one(t);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace detail

/// Runs `trials` independent trials; trial t uses seed base_seed + t. Results
/// are assembled in trial order, so they do not depend on `threads`.
template <ChannelModel Channel>
BatchResult run_batch(Scheme scheme, const SimConfig& cfg, const Channel& ch, std::size_t trials,
                      std::uint64_t base_seed, unsigned threads = 1) {
  if (trials == 0) throw ConfigError("trials must be at least 1");
  cfg.validate();
  std::vector<TrialRecord> records(trials);
  detail::parallel_trials(trials, threads, [&](std::size_t t) {
    const std::uint64_t seed = base_seed + t;
    try {
      switch (scheme) {
        case Scheme::direct: {
          BlockRecord r;
          r.M = r.j = simulate_direct(cfg, ch, seed);
          records[t].blocks = {r};
          break;
        }
        case Scheme::naive: records[t] = simulate_naive(cfg, ch, seed); break;
        case Scheme::netcoded: records[t] = simulate_netcoded(cfg, ch, seed); break;
      }
    } catch (const RunawayError& e) {
      throw RunawayError(std::string(e.what()) + " in trial " + std::to_string(t), e.cap);
    }
  });

  BatchResult out;
  out.scheme = scheme;
  out.trials = trials;
  const std::size_t first_counted = scheme == Scheme::netcoded ? cfg.burn_in : 0;
  std::vector<double> block_sums;
  for (const auto& rec : records) {
    if (block_sums.size() < rec.blocks.size()) block_sums.resize(rec.blocks.size(), 0.0);
    for (std::size_t b = 0; b < rec.blocks.size(); ++b) {
      const BlockRecord& blk = rec.blocks[b];
      block_sums[b] += static_cast<double>(blk.M);
      out.d_buffers += blk.d_buffers;
      if (b < first_counted) continue;
      out.histogram.add(static_cast<std::int64_t>(blk.M));
      out.samples.push_back(static_cast<double>(blk.M));
    }
  }
  for (auto& s : block_sums) s /= static_cast<double>(trials);
  out.per_block_mean = std::move(block_sums);
  out.summary = summarize(out.samples);
  return out;
}

inline BatchResult run_batch(Scheme scheme, const SimConfig& cfg, std::size_t trials,
                             std::uint64_t base_seed, unsigned threads = 1) {
  return run_batch(scheme, cfg, ErasureChannel{cfg.params}, trials, base_seed, threads);
}

}  // namespace ncfountain
