#pragma once

// Rayleigh-fading links. Approach 1 maps each packet slot to an erasure by
// outage, with successive interference cancellation when the source and a
// relay transmit together. Approach 2 is a flow model in which every link
// carries its instantaneous capacity, with analogue superposition of the
// current and next block at the source.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ncfountain/erasure_analysis.hpp"
#include "ncfountain/errors.hpp"
#include "ncfountain/gf2_fountain.hpp"
#include "ncfountain/protocol_sim.hpp"
#include "ncfountain/random.hpp"

namespace ncfountain {

/// Node distances; the path-loss rate of a link is d^exponent.
struct Topology {
  double d_sd = 20.0;
  double d_sr = 10.3;
  double d_rd = 10.3;
  double d_rr = 5.0;
  double path_loss_exponent = 3.0;

  double lambda(double d) const { return std::pow(d, path_loss_exponent); }

  void validate() const {
    for (double d : {d_sd, d_sr, d_rd, d_rr})
      if (!(d > 0.0)) throw ConfigError("distances must be positive");
    if (!std::isfinite(path_loss_exponent)) throw ConfigError("path-loss exponent must be finite");
  }
};

struct WirelessParams {
  double lambda_sd = 1.0;  ///< rate of the exponential law of |h_SD|^2
  double lambda_sr = 1.0;
  double lambda_rd = 1.0;
  double lambda_rr = 1.0;
  double snr = 1.0;  ///< transmit power over noise power, linear
  std::size_t m = kDefaultPacketBits;
  std::size_t mu = kDefaultHeaderBits;
  std::size_t n = kDefaultPacketBits + kDefaultHeaderBits;  ///< channel uses per packet
  double gamma_gap = 1.0;     ///< linear SNR penalty in (0, 1]
  double alpha_weight = 0.0;  ///< share of the source amplitude on the current block

  static WirelessParams from_topology(const Topology& t, double snr) {
    t.validate();
    WirelessParams w;
    w.lambda_sd = t.lambda(t.d_sd);
    w.lambda_sr = t.lambda(t.d_sr);
    w.lambda_rd = t.lambda(t.d_rd);
    w.lambda_rr = t.lambda(t.d_rr);
    w.snr = snr;
    return w;
  }

  double beta() const { return std::sqrt(std::max(0.0, 1.0 - alpha_weight * alpha_weight)); }

  /// SNR threshold below which a packet of m + mu bits in n uses is in outage.
  double chi() const {
    return std::exp2(2.0 * static_cast<double>(m + mu) / static_cast<double>(n)) - 1.0;
  }

  void validate() const {
    for (double l : {lambda_sd, lambda_sr, lambda_rd, lambda_rr})
      if (!(l > 0.0) || !std::isfinite(l)) throw ConfigError("path-loss rates must be positive");
    if (!(snr > 0.0) || !std::isfinite(snr)) throw ConfigError("snr must be positive");
    if (n == 0) throw ConfigError("codeword length n must be at least 1");
    if (!(gamma_gap > 0.0 && gamma_gap <= 1.0)) throw ConfigError("gamma_gap must lie in (0, 1]");
    if (!(alpha_weight >= 0.0 && alpha_weight <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
  }
};

/// Exponential gain |h|^2 with rate lambda.
inline double sample_gain(double lambda, Rng& rng) {
  if (!(lambda > 0.0)) throw DomainError("sample_gain: lambda must be positive");
  return rng.exponential(lambda);
}

inline double outage_threshold(std::size_t m, std::size_t mu, std::size_t n) {
  if (n == 0) throw DomainError("outage_threshold: n must be positive");
  return std::exp2(2.0 * static_cast<double>(m + mu) / static_cast<double>(n)) - 1.0;
}

/// Probability that a packet of m + mu bits sent in n channel uses is in
/// outage over a link with path-loss rate lambda.
inline double link_erasure_prob(double lambda, double snr, std::size_t m, std::size_t mu, std::size_t n) {
  if (!(lambda > 0.0) || !(snr > 0.0)) throw DomainError("link_erasure_prob: arguments must be positive");
  return -std::expm1(-lambda * outage_threshold(m, mu, n) / snr);
}

inline double link_erasure_prob(double lambda, const WirelessParams& w) {
  return link_erasure_prob(lambda, w.snr, w.m, w.mu, w.n);
}

/// Per-link erasure probabilities of Approach 1 as an erasure network.
inline ErasureNetworkParams equivalent_erasure_network(const WirelessParams& w, std::size_t K,
                                                       std::size_t relays = 2) {
  w.validate();
  ErasureNetworkParams p;
  p.pe_sd = link_erasure_prob(w.lambda_sd, w);
  p.pe_sr = link_erasure_prob(w.lambda_sr, w);
  p.pe_rd = link_erasure_prob(w.lambda_rd, w);
  p.pe_rr = link_erasure_prob(w.lambda_rr, w);
  p.K = K;
  p.relays = relays;
  return p;
}

// ---------------------------------------------------------------------------
// Successive decoding of two simultaneous packets (Approach 1)

/// Closed-form outage probabilities for a receiver hearing the source over a
/// link with rate lambda_s and a relay over a link with rate lambda_r.
/// Order a decodes the relay first, order b the source first. Each value is the
/// unconditional probability of its outage event:
///   pe_r_a: relay SINR (source as noise) <= chi
///   pe_s_a: source SNR alone <= chi
///   pe_s_b: source SINR (relay as noise) <= chi
///   pe_r_b: relay SNR alone <= chi
struct SicClosedForms {
  double p_order_a = 0.0;
  double pe_r_a = 0.0;
  double pe_s_a = 0.0;
  double pe_s_b = 0.0;
  double pe_r_b = 0.0;
};

inline SicClosedForms sic_closed_forms(double lambda_s, double lambda_r, double snr, double chi) {
  if (!(lambda_s > 0.0 && lambda_r > 0.0 && snr > 0.0 && chi > 0.0))
    throw DomainError("sic_closed_forms: arguments must be positive");
  SicClosedForms c;
  c.p_order_a = lambda_s / (lambda_s + lambda_r);
  c.pe_r_a = 1.0 - (lambda_s / chi) / (lambda_r + lambda_s / chi) * std::exp(-lambda_r * chi / snr);
  c.pe_s_a = -std::expm1(-lambda_s * chi / snr);
  c.pe_s_b = 1.0 - (lambda_r / chi) / (lambda_s + lambda_r / chi) * std::exp(-lambda_s * chi / snr);
  c.pe_r_b = -std::expm1(-lambda_r * chi / snr);
  return c;
}

struct SlotOutcome {
  bool relay_first = false;  ///< the relay's link was at least as strong
  bool decoded_from_r = false;
  bool decoded_from_s = false;
};

/// Successive decoding for given gains: the stronger packet is decoded first
/// with the other as noise; the weaker one is decodable only after the first
/// was decoded and cancelled.
inline SlotOutcome sic_decode(double gain_s, double gain_r, double snr, double chi) {
  SlotOutcome o;
  o.relay_first = gain_r >= gain_s;
  const double strong = o.relay_first ? gain_r : gain_s;
  const double weak = o.relay_first ? gain_s : gain_r;
  const bool first_ok = strong * snr / (weak * snr + 1.0) > chi;
  const bool second_ok = first_ok && weak * snr > chi;
  o.decoded_from_r = o.relay_first ? first_ok : second_ok;
  o.decoded_from_s = o.relay_first ? second_ok : first_ok;
  return o;
}

/// Draws the source-link gain, then the relay-link gain, and decodes.
inline SlotOutcome sic_phase2_outcome(double lambda_s, double lambda_r, double snr, double chi, Rng& rng) {
  const double gs = sample_gain(lambda_s, rng);
  const double gr = sample_gain(lambda_r, rng);
  return sic_decode(gs, gr, snr, chi);
}

/// Relay packet alone: current block. Source packet alone: still mixed. Both:
/// the relay packet plus the next-block packet left after removing it.
inline BufferTargets classify_phase2_wireless(const SlotOutcome& o) {
  BufferTargets t;
  t.buffer1 = o.decoded_from_r;
  t.buffer2 = o.decoded_from_s && !o.decoded_from_r;
  t.buffer3 = o.decoded_from_s && o.decoded_from_r;
  return t;
}

/// Approach 1 channel for the packet simulator: i.i.d. Rayleigh gains per slot,
/// outage as erasure, successive decoding in phase two.
struct FadingChannel {
  WirelessParams params;

  double lambda(Link link) const {
    switch (link) {
      case Link::sd: return params.lambda_sd;
      case Link::sr: return params.lambda_sr;
      case Link::rd: return params.lambda_rd;
      case Link::rr: return params.lambda_rr;
    }
    return params.lambda_sd;
  }

  bool erased(Link link, Rng& rng) const {
    return !(sample_gain(lambda(link), rng) * params.snr > params.chi());
  }

  Phase2Reception phase2(Receiver rx, Rng& rng) const {
    const bool at_d = rx == Receiver::destination;
    const SlotOutcome o = sic_phase2_outcome(at_d ? params.lambda_sd : params.lambda_sr,
                                             at_d ? params.lambda_rd : params.lambda_rr, params.snr,
                                             params.chi(), rng);
    return {o.decoded_from_s, o.decoded_from_r};
  }

  BufferTargets phase2_targets(Phase2Reception rec) const {
    return classify_phase2_wireless(SlotOutcome{false, rec.from_relay, rec.from_source});
  }
};

/// Approach 1 batch for any scheme. The SimConfig's erasure probabilities are
/// replaced by the outage probabilities of `w`.
inline BatchResult simulate_approach1(Scheme scheme, SimConfig cfg, const WirelessParams& w,
                                      std::size_t trials, std::uint64_t base_seed, unsigned threads = 1) {
  w.validate();
  cfg.params = equivalent_erasure_network(w, cfg.params.K, cfg.params.relays);
  return run_batch(scheme, cfg, FadingChannel{w}, trials, base_seed, threads);
}

// ---------------------------------------------------------------------------
// Capacity flow model (Approach 2)

/// 0.5 log2(1 + gamma_gap * gain_sq_snr) bits per channel use.
inline double capacity(double gain_sq_snr, double gamma_gap = 1.0) {
  if (!(gain_sq_snr >= 0.0)) throw DomainError("capacity: gain must be nonnegative");
  if (!(gamma_gap > 0.0 && gamma_gap <= 1.0)) throw DomainError("capacity: gamma_gap must lie in (0, 1]");
  return 0.5 * std::log2(1.0 + gamma_gap * gain_sq_snr);
}

struct MacRates {
  double current = 0.0;  ///< rate of block i
  double next = 0.0;     ///< rate of block i + 1
};

/// Corner of the two-user MAC formed by the co-phased current-block stream
/// (gain alpha h_SD + h_RD) and the next-block stream (gain beta h_SD), where
/// the next-block stream is decoded first with the current one as noise.
inline MacRates mac_corner_rates(double alpha, double h_sd, double h_rd, double snr, double gamma_gap = 1.0) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("mac_corner_rates: alpha must lie in [0, 1]");
  if (!(h_sd >= 0.0 && h_rd >= 0.0 && snr >= 0.0)) throw DomainError("mac_corner_rates: negative input");
  const double beta2 = std::max(0.0, 1.0 - alpha * alpha);
  const double g = alpha * h_sd + h_rd;
  MacRates r;
  r.current = capacity(g * g * snr, gamma_gap);
  r.next = capacity(beta2 * h_sd * h_sd * snr / (g * g * snr + 1.0), gamma_gap);
  return r;
}

/// Smallest alpha whose current-block corner rate reaches `target`, by
/// bisection; nullopt if even alpha = 1 falls short.
inline std::optional<double> solve_alpha_operating_point(double h_sd, double h_rd, double snr, double target,
                                                         double gamma_gap = 1.0) {
  auto rate = [&](double a) { return mac_corner_rates(a, h_sd, h_rd, snr, gamma_gap).current; };
  if (rate(0.0) >= target) return 0.0;
  if (rate(1.0) < target) return std::nullopt;
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (rate(mid) >= target ? hi : lo) = mid;
  }
  return hi;
}

/// The operating point that keeps the current-block rate equal to that of the
/// relay transmitting alone.
inline double relay_only_alpha(double h_sd, double h_rd, double snr, double gamma_gap = 1.0) {
  return solve_alpha_operating_point(h_sd, h_rd, snr, capacity(h_rd * h_rd * snr, gamma_gap), gamma_gap)
      .value_or(1.0);
}

enum class AlphaPolicy { automatic, fixed };

struct Approach2Config {
  WirelessParams wireless;
  std::size_t K = 100;
  Scheme scheme = Scheme::netcoded;
  AlphaPolicy alpha_policy = AlphaPolicy::automatic;  ///< fixed uses wireless.alpha_weight
  bool fixed_gain = false;  ///< |h|^2 = 1 / lambda in every slot
  std::size_t n_blocks = 1;

  double block_bits() const { return static_cast<double>(K) * static_cast<double>(wireless.m); }
  std::size_t slot_cap() const { return 100 * K; }

  void validate() const {
    wireless.validate();
    if (K == 0) throw ConfigError("K must be at least 1");
    if (n_blocks == 0) throw ConfigError("n_blocks must be at least 1");
  }
};

struct Approach2Block {
  std::size_t slots = 0;
  std::size_t phase1_slots = 0;
  int first_relay = -1;
  double carry_in_d = 0.0;     ///< next-block bits D held when the block began
  double carry_in_idle = 0.0;  ///< same for the relay labelled R2
  double alpha_mean = 0.0;     ///< average alpha over phase-two slots
  double credited_d = 0.0;     ///< bits credited to D's accounts during the block
  double credit_bound = 0.0;   ///< n times the largest per-slot rate D could see, summed
};

namespace detail {

struct FlowGains {
  double sd, sr1, sr2, rd, rr;
};

inline double flow_gain(double lambda, bool fixed, Rng& rng) {
  return fixed ? 1.0 / lambda : sample_gain(lambda, rng);
}

/// Whether the idle relay can recover the next-block stream sent at rate
/// `r_next` while the current-block stream is sent at `r_cur`, under either
/// decoding order.
inline bool idle_relay_decodes_next(double alpha, double h_sr, double h_rr, double snr, double gamma_gap,
                                    double r_cur, double r_next) {
  const double beta2 = std::max(0.0, 1.0 - alpha * alpha);
  const double g = alpha * h_sr + h_rr;
  const double next_as_first = capacity(beta2 * h_sr * h_sr * snr / (g * g * snr + 1.0), gamma_gap);
  if (r_next <= next_as_first) return true;
  const double cur_as_first = capacity(g * g * snr / (beta2 * h_sr * h_sr * snr + 1.0), gamma_gap);
  return r_cur <= cur_as_first && r_next <= capacity(beta2 * h_sr * h_sr * snr, gamma_gap);
}

}  // namespace detail

/// Slots per block of the capacity flow model. A slot is n channel uses; each
/// link delivers its instantaneous capacity times n bits of fountain-coded
/// information, and a node holding K m bits of a block decodes it.
inline std::vector<Approach2Block> simulate_approach2(const Approach2Config& cfg, std::uint64_t seed) {
  cfg.validate();
  const WirelessParams& w = cfg.wireless;
  const double n = static_cast<double>(w.n);
  const double need = cfg.block_bits();
  const double G = w.gamma_gap;
  Rng rng(seed);
  auto mag = [&](double lambda) { return std::sqrt(detail::flow_gain(lambda, cfg.fixed_gain, rng)); };

  std::vector<Approach2Block> out;
  out.reserve(cfg.n_blocks);
  double carry_d = 0.0;
  std::array<double, 2> carry_relay{0.0, 0.0};
  for (std::size_t b = 0; b < cfg.n_blocks; ++b) {
    Approach2Block blk;
    blk.carry_in_d = carry_d;
    blk.carry_in_idle = carry_relay[1];
    double d_cur = carry_d;
    std::array<double, 2> r_cur = carry_relay;
    double d_next = 0.0;
    double idle_next = 0.0;
    std::size_t slot = 0;
    int first = -1;
    auto pick = [&] {
      if (cfg.scheme == Scheme::direct) return -1;
      if (r_cur[1] >= need) return 1;
      if (r_cur[0] >= need) return 0;
      return -1;
    };
    auto tick = [&] {
      if (++slot > cfg.slot_cap())
        throw RunawayError("simulate_approach2: block exceeded " + std::to_string(cfg.slot_cap()) + " slots",
                           cfg.slot_cap());
    };

    if (d_cur < need) first = pick();
    while (d_cur < need && first < 0) {
      tick();
      const double h_sd = mag(w.lambda_sd);
      const double h_sr1 = mag(w.lambda_sr);
      const double h_sr2 = mag(w.lambda_sr);
      const double got = capacity(h_sd * h_sd * w.snr, G) * n;
      d_cur += got;
      blk.credited_d += got;
      blk.credit_bound += got;
      r_cur[0] += capacity(h_sr1 * h_sr1 * w.snr, G) * n;
      r_cur[1] += capacity(h_sr2 * h_sr2 * w.snr, G) * n;
      if (d_cur < need) first = pick();
    }
    blk.phase1_slots = slot;
    blk.first_relay = d_cur >= need ? -1 : first;

    double alpha_sum = 0.0;
    std::size_t phase2 = 0;
    while (d_cur < need) {
      tick();
      ++phase2;
      const double h_sd = mag(w.lambda_sd);
      const double h_rd = mag(w.lambda_rd);
      const double h_sr = mag(w.lambda_sr);
      const double h_rr = mag(w.lambda_rr);
      double alpha = 1.0;
      MacRates rates;
      if (cfg.scheme == Scheme::naive) {
        rates.current = capacity(h_rd * h_rd * w.snr, G);
        alpha = 0.0;
      } else {
        alpha = cfg.alpha_policy == AlphaPolicy::fixed ? w.alpha_weight
                                                        : relay_only_alpha(h_sd, h_rd, w.snr, G);
        rates = mac_corner_rates(alpha, h_sd, h_rd, w.snr, G);
        if (rates.next > 0.0 &&
            detail::idle_relay_decodes_next(alpha, h_sr, h_rr, w.snr, G, rates.current, rates.next))
          idle_next += rates.next * n;
      }
      alpha_sum += alpha;
      d_cur += rates.current * n;
      d_next += rates.next * n;
      blk.credited_d += (rates.current + rates.next) * n;
      const double sum_gain = (h_sd + h_rd) * (h_sd + h_rd) + h_sd * h_sd;
      blk.credit_bound += capacity(sum_gain * w.snr, G) * n;
    }
    blk.slots = slot;
    blk.alpha_mean = phase2 > 0 ? alpha_sum / static_cast<double>(phase2) : 0.0;
    out.push_back(blk);

    // The relay that transmitted starts the next block empty as R1; the idle
    // relay keeps what it heard of the next block as R2.
    if (first >= 0) {
      carry_d = std::min(d_next, need);
      carry_relay = {0.0, std::min(idle_next, need)};
    } else {
      carry_d = 0.0;
      carry_relay = {0.0, 0.0};
    }
  }
  return out;
}

}  // namespace ncfountain
