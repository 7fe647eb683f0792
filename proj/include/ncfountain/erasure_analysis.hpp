#pragma once

// Closed-form transmission-count distributions for direct transmission,
// naive two-phase relaying and network-coded relaying over erasure links.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "ncfountain/errors.hpp"
#include "ncfountain/random.hpp"

namespace ncfountain {

struct ErasureNetworkParams {
  double pe_sd = 0.4;
  double pe_sr = 0.2;
  double pe_rd = 0.2;
  double pe_rr = 0.2;
  std::size_t K = 100;
  std::size_t relays = 2;

  void validate() const {
    for (auto [name, p] : {std::pair{"pe_sd", pe_sd}, std::pair{"pe_sr", pe_sr},
                           std::pair{"pe_rd", pe_rd}, std::pair{"pe_rr", pe_rr}})
      if (!(p >= 0.0 && p <= 1.0))
        throw ConfigError(std::string(name) + " must lie in [0, 1]");
    if (K == 0) throw ConfigError("K must be at least 1");
    if (relays == 0) throw ConfigError("relay count must be at least 1");
  }
};

/// Where infinite sums over M are cut. The support ends at
/// max(4K, first M whose remaining tail is below tol), and must not exceed
/// m_max (0 selects 100 K, the simulator's runaway cap).
struct TruncationPolicy {
  std::size_t m_max = 0;
  double tol = 1e-9;

  std::size_t limit(std::size_t K) const { return m_max != 0 ? m_max : 100 * K; }
};

/// Distribution of the transmission count M on [0, support_end()], with the
/// probability mass beyond the support recorded separately.
class TransmissionPdf {
 public:
  TransmissionPdf() = default;
  TransmissionPdf(std::vector<double> values, double tail_mass, double normalizer)
      : values_(std::move(values)), tail_mass_(tail_mass), normalizer_(normalizer) {}

  static TransmissionPdf point_mass(std::size_t M) {
    std::vector<double> v(M + 1, 0.0);
    v[M] = 1.0;
    return TransmissionPdf(std::move(v), 0.0, 1.0);
  }

  double operator()(std::size_t M) const { return M < values_.size() ? values_[M] : 0.0; }
  std::size_t support_end() const { return values_.empty() ? 0 : values_.size() - 1; }
  const std::vector<double>& values() const noexcept { return values_; }
  double tail_mass() const noexcept { return tail_mass_; }
  /// Constant the raw sequence was divided by (Omega or Omega_2).
  double normalizer() const noexcept { return normalizer_; }
  double total() const { return std::accumulate(values_.begin(), values_.end(), 0.0) + tail_mass_; }

 private:
  std::vector<double> values_;
  double tail_mass_ = 0.0;
  double normalizer_ = 1.0;
};

struct PdfStats {
  double mean = 0.0;
  double variance = 0.0;
  double tail_mass = 0.0;
};

inline PdfStats pdf_stats(const TransmissionPdf& pdf) {
  const auto& v = pdf.values();
  const double mass = std::accumulate(v.begin(), v.end(), 0.0);
  PdfStats st;
  st.tail_mass = pdf.tail_mass();
  if (mass <= 0.0) return st;
  double m1 = 0.0;
  for (std::size_t M = 0; M < v.size(); ++M) m1 += static_cast<double>(M) * v[M];
  m1 /= mass;
  double m2 = 0.0;
  for (std::size_t M = 0; M < v.size(); ++M) {
    const double d = static_cast<double>(M) - m1;
    m2 += d * d * v[M];
  }
  st.mean = m1;
  st.variance = m2 / mass;
  return st;
}

// ---------------------------------------------------------------------------
// Binomial and rank primitives

inline double log_choose(std::size_t n, std::size_t k) {
  return std::lgamma(static_cast<double>(n) + 1) - std::lgamma(static_cast<double>(k) + 1) -
         std::lgamma(static_cast<double>(n - k) + 1);
}

/// Probability that exactly N of M packets survive a link with erasure
/// probability pe.
inline double binomial_pmf(std::size_t M, double pe, std::size_t N) {
  if (N > M) throw DomainError("binomial_pmf: N exceeds M");
  if (pe <= 0.0) return N == M ? 1.0 : 0.0;
  if (pe >= 1.0) return N == 0 ? 1.0 : 0.0;
  const double log_p = log_choose(M, N) + static_cast<double>(N) * std::log1p(-pe) +
                       static_cast<double>(M - N) * std::log(pe);
  return std::exp(log_p);
}

inline std::vector<double> binomial_row(std::size_t M, double pe) {
  std::vector<double> row(M + 1);
  for (std::size_t N = 0; N <= M; ++N) row[N] = binomial_pmf(M, pe, N);
  return row;
}

namespace detail {
/// sum_{i<K} log(1 - 2^(i-N)), the log of the full-rank probability.
inline double log_full_rank(std::size_t K, std::size_t N) {
  double acc = 0.0;
  for (std::size_t i = 0; i < K; ++i)
    acc += std::log1p(-std::exp2(static_cast<double>(i) - static_cast<double>(N)));
  return acc;
}
}  // namespace detail

/// Probability that a K x N uniform binary matrix has rank K.
inline double full_rank_cdf(std::size_t K, std::size_t N) {
  if (K == 0) throw DomainError("full_rank_cdf: K must be positive");
  if (N < K) return 0.0;
  return std::exp(detail::log_full_rank(K, N));
}

/// 1 - full_rank_cdf, accurate when the CDF is close to one.
inline double full_rank_survival(std::size_t K, std::size_t N) {
  if (K == 0) throw DomainError("full_rank_survival: K must be positive");
  if (N < K) return 1.0;
  return -std::expm1(detail::log_full_rank(K, N));
}

/// Probability that decoding first becomes possible with the N-th received
/// packet. Uses the product closed form for N > K instead of differencing the
/// CDF.
inline double decode_pmf(std::size_t K, std::size_t N) {
  if (K == 0) throw DomainError("decode_pmf: K must be positive");
  if (N < K) return 0.0;
  if (N == K) return full_rank_cdf(K, K);
  const double n = static_cast<double>(N);
  const double k = static_cast<double>(K);
  // 2^-N (2^K - 1) / (1 - 2^(K-N)) * prod_{i<K} (1 - 2^(i-N+1))
  const double log_scale = -n * std::log(2.0) + k * std::log(2.0) + std::log1p(-std::exp2(-k)) -
                           std::log1p(-std::exp2(k - n));
  return std::exp(log_scale + detail::log_full_rank(K, N - 1));
}

/// f_{n_p}(N): decode pmf for a receiver already holding n_p packets.
inline double aux_fnp(std::size_t K, std::size_t n_p, std::size_t N) {
  if (N == 0) return full_rank_cdf(K, n_p);
  return decode_pmf(K, N + n_p);
}

namespace detail {

/// Rank tables for one K. Beyond K + kSpan the decode pmf and the survival are
/// below 2^-kSpan and are treated as zero.
class RankTables {
 public:
  static constexpr std::size_t kSpan = 200;

  explicit RankTables(std::size_t K) : K_(K), f_(K + kSpan + 1), survival_(K + kSpan + 1) {
    for (std::size_t N = 0; N <= K + kSpan; ++N) {
      f_[N] = decode_pmf(K, N);
      survival_[N] = full_rank_survival(K, N);
    }
  }

  std::size_t K() const noexcept { return K_; }
  double f(std::size_t N) const { return N < f_.size() ? f_[N] : 0.0; }
  double survival(std::size_t N) const { return N < survival_.size() ? survival_[N] : 0.0; }
  double cdf(std::size_t N) const { return 1.0 - survival(N); }
  /// f_{n_p}(N)
  double f_carry(std::size_t n_p, std::size_t N) const {
    return N == 0 ? (n_p >= K_ ? cdf(n_p) : 0.0) : f(N + n_p);
  }
  /// Largest N with a nonzero tabulated f.
  std::size_t last_support() const noexcept { return f_.size() - 1; }

 private:
  std::size_t K_;
  std::vector<double> f_;
  std::vector<double> survival_;
};

/// Unnormalized decode-time sequence over one link for a receiver holding
/// n_p packets: entry 0 is f_{n_p}(0) and entry M > 0 is
/// (1 - pe) sum_i B_{M-1,pe}(i) f_{n_p}(i + 1). Length L + 1.
inline std::vector<double> decode_time_raw(const RankTables& rt, std::size_t n_p, double pe,
                                           std::size_t L) {
  std::vector<double> raw(L + 1, 0.0);
  raw[0] = rt.f_carry(n_p, 0);
  if (pe >= 1.0) return raw;
  const std::size_t K = rt.K();
  // f_{n_p}(i + 1) = f(i + 1 + n_p) is nonzero for K <= i + 1 + n_p <= last_support.
  const std::size_t i_lo = (K > n_p + 1) ? K - n_p - 1 : 0;
  const std::size_t last = rt.last_support();
  if (last < n_p + 1) return raw;
  const std::size_t i_hi = last - n_p - 1;
  for (std::size_t M = 1; M <= L; ++M) {
    const std::size_t trials = M - 1;
    if (trials < i_lo) continue;
    double acc = 0.0;
    for (std::size_t i = i_lo; i <= std::min(trials, i_hi); ++i)
      acc += binomial_pmf(trials, pe, i) * rt.f(i + 1 + n_p);
    raw[M] = (1.0 - pe) * acc;
  }
  return raw;
}

/// Probability that a receiver holding n_p packets has not decoded after L
/// transmissions: sum_N B_{L,pe}(N) (1 - F(N + n_p)).
inline double decode_time_survival(const RankTables& rt, std::size_t n_p, double pe, std::size_t L) {
  double acc = 0.0;
  for (std::size_t N = 0; N <= L; ++N) {
    const double s = rt.survival(N + n_p);
    if (s == 0.0) break;
    acc += binomial_pmf(L, pe, N) * s;
  }
  return acc;
}

/// 1 - sum_{j < M} raw(j) for M in [0, raw.size()].
inline std::vector<double> survival_from(const std::vector<double>& raw) {
  std::vector<double> s(raw.size() + 1);
  double cum = 0.0;
  for (std::size_t M = 0; M <= raw.size(); ++M) {
    s[M] = std::max(0.0, 1.0 - cum);
    if (M < raw.size()) cum += raw[M];
  }
  return s;
}

inline constexpr double kNegligible = 1e-20;

/// Binomial row restricted to entries above kNegligible.
struct SparseRow {
  std::size_t lo = 0;
  std::vector<double> values;
};

inline SparseRow sparse_binomial_row(std::size_t n, double pe) {
  std::vector<double> row = binomial_row(n, pe);
  std::size_t lo = 0;
  std::size_t hi = row.size();
  while (lo < hi && row[lo] < kNegligible) ++lo;
  while (hi > lo && row[hi - 1] < kNegligible) --hi;
  return SparseRow{lo, std::vector<double>(row.begin() + static_cast<std::ptrdiff_t>(lo),
                                           row.begin() + static_cast<std::ptrdiff_t>(hi))};
}

/// Phase-two term shared by the naive and network-coded distributions. For
/// every relay decode time j with weight[j] > 0 and every M in (j, L] it
/// reports
///   (1 - pe2) sum_s sum_t B_{j,pe1}(s) B_{M-j-1,pe2}(t) f_{n3}(s + t + 1)
/// through visit(j, M, value). pe1 is the destination's phase-one link and
/// pe2 its phase-two erasure probability for current-block packets.
///
/// The double sum is evaluated as sum_s B_{j,pe1}(s) G_{M-j-1}(s) with
/// G_0(s) = f_{n3}(s + 1) and G_l(s) = pe2 G_{l-1}(s) + (1 - pe2) G_{l-1}(s + 1).
template <class Visit>
void phase_two_kernel(const RankTables& rt, const std::vector<double>& weight, double pe1,
                      double pe2, std::size_t n3, std::size_t L, Visit&& visit) {
  if (L == 0 || pe2 >= 1.0) return;
  std::vector<std::size_t> js;
  std::vector<SparseRow> rows;
  for (std::size_t j = 0; j + 1 <= L && j < weight.size(); ++j) {
    if (weight[j] < kNegligible) continue;
    js.push_back(j);
    rows.push_back(sparse_binomial_row(j, pe1));
  }
  if (js.empty()) return;

  std::vector<double> G(2 * L + 2);
  for (std::size_t s = 0; s < G.size(); ++s) G[s] = rt.f_carry(n3, s + 1);

  for (std::size_t l = 0; l < L; ++l) {
    for (std::size_t idx = 0; idx < js.size(); ++idx) {
      const std::size_t j = js[idx];
      const std::size_t M = j + 1 + l;
      if (M > L) break;
      const SparseRow& row = rows[idx];
      double dot = 0.0;
      for (std::size_t k = 0; k < row.values.size(); ++k) dot += row.values[k] * G[row.lo + k];
      visit(j, M, (1.0 - pe2) * dot);
    }
    for (std::size_t s = 0; s + 1 < G.size(); ++s) G[s] = pe2 * G[s] + (1.0 - pe2) * G[s + 1];
  }
}

/// Cuts a raw sequence at max(4K, first M whose remaining tail is below tol)
/// and normalizes it. Returns false when the tail never drops below tol.
inline bool finalize_composite(std::vector<double>& raw, std::size_t K, double tol,
                               TransmissionPdf& out, double& achieved_tail) {
  double cum = 0.0;
  const std::size_t min_end = std::min(4 * K, raw.size() - 1);
  for (std::size_t M = 0; M < raw.size(); ++M) {
    cum += raw[M];
    const double tail = std::max(0.0, 1.0 - cum);
    achieved_tail = tail;
    if (M >= min_end && tail < tol) {
      raw.resize(M + 1);
      const double omega = cum + tail;
      for (auto& v : raw) v /= omega;
      out = TransmissionPdf(std::move(raw), tail / omega, omega);
      return true;
    }
  }
  return false;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Direct transmission and the carried-packet auxiliary function

/// g_{n_p,pe}: decode-time distribution of a point-to-point link for a
/// receiver already holding n_p packets. n_p = 0 gives the direct-transmission
/// distribution.
inline TransmissionPdf aux_g_pdf(std::size_t K, std::size_t n_p, double pe,
                                 const TruncationPolicy& policy = {}) {
  if (K == 0) throw DomainError("aux_g: K must be positive");
  if (!(pe >= 0.0 && pe < 1.0)) throw DomainError("aux_g: erasure probability must lie in [0, 1)");
  const detail::RankTables rt(K);
  const std::size_t limit = policy.limit(K);
  std::size_t L = std::min(4 * K, limit);
  while (true) {
    std::vector<double> raw = detail::decode_time_raw(rt, n_p, pe, L);
    double cum = 0.0;
    const std::size_t min_end = std::min(4 * K, L);
    for (std::size_t M = 0; M <= L; ++M) {
      cum += raw[M];
      if (M >= min_end && 1.0 - cum < policy.tol) {
        const double tail = detail::decode_time_survival(rt, n_p, pe, M);
        if (tail >= policy.tol) continue;
        raw.resize(M + 1);
        const double omega = cum + tail;
        for (auto& v : raw) v /= omega;
        return TransmissionPdf(std::move(raw), tail / omega, omega);
      }
    }
    if (L >= limit)
      throw TruncationError("decode-time distribution does not reach tolerance",
                            detail::decode_time_survival(rt, n_p, pe, L), L);
    L = std::min(2 * L, limit);
  }
}

inline double aux_g(std::size_t K, std::size_t n_p, double pe, std::size_t M,
                    const TruncationPolicy& policy = {}) {
  return aux_g_pdf(K, n_p, pe, policy)(M);
}

/// Distribution of the number of source transmissions until the destination
/// decodes over a single erasure link.
inline TransmissionPdf direct_pdf(std::size_t K, double pe, const TruncationPolicy& policy = {}) {
  if (policy.m_max != 0 && policy.m_max < K) throw DomainError("direct_pdf: M_max must be at least K");
  return aux_g_pdf(K, 0, pe, policy);
}

// ---------------------------------------------------------------------------
// Relay decode time

/// Probability that the first of R_count i.i.d. relays decodes at time j,
/// given the per-relay decode pmf.
inline double relay_any_decode_pmf(std::size_t j, const TransmissionPdf& per_relay,
                                   std::size_t R_count) {
  const double p = per_relay(j);
  double later = per_relay.tail_mass();
  for (std::size_t i = j + 1; i <= per_relay.support_end(); ++i) later += per_relay(i);
  double q = 0.0;
  for (std::size_t r = 1; r <= R_count; ++r)
    q += std::exp(log_choose(R_count, r)) * std::pow(p, static_cast<double>(r)) *
         std::pow(later, static_cast<double>(R_count - r));
  return q;
}

// ---------------------------------------------------------------------------
// Naive relaying

/// Transmission-count distribution of two-phase relaying in which the first
/// relay to decode forwards fresh coded packets and the source falls silent.
inline TransmissionPdf naive_pdf(const ErasureNetworkParams& params,
                                 const TruncationPolicy& policy = {}) {
  params.validate();
  if (params.pe_sd >= 1.0 && params.pe_rd >= 1.0)
    throw DomainError("naive_pdf: destination can never decode");
  const std::size_t K = params.K;
  const detail::RankTables rt(K);
  const std::size_t limit = policy.limit(K);
  const double R = static_cast<double>(params.relays);
  std::size_t L = std::min(4 * K, limit);
  while (true) {
    const std::vector<double> p_sd = detail::decode_time_raw(rt, 0, params.pe_sd, L);
    const std::vector<double> p_sr = detail::decode_time_raw(rt, 0, params.pe_sr, L);
    const std::vector<double> relay_later = detail::survival_from(p_sr);

    std::vector<double> q(L + 1, 0.0);
    for (std::size_t j = 0; j <= L; ++j)
      for (std::size_t r = 1; r <= params.relays; ++r)
        q[j] += std::exp(log_choose(params.relays, r)) * std::pow(p_sr[j], static_cast<double>(r)) *
                std::pow(relay_later[j + 1], R - static_cast<double>(r));

    std::vector<double> raw(L + 1, 0.0);
    for (std::size_t M = 0; M <= L; ++M) raw[M] = p_sd[M] * std::pow(relay_later[M], R);
    detail::phase_two_kernel(rt, q, params.pe_sd, params.pe_rd, 0, L,
                             [&](std::size_t j, std::size_t M, double w) { raw[M] += q[j] * w; });

    TransmissionPdf out;
    double tail = 0.0;
    if (detail::finalize_composite(raw, K, policy.tol, out, tail)) return out;
    if (L >= limit) throw TruncationError("naive relaying distribution does not reach tolerance", tail, L);
    L = std::min(2 * L, limit);
  }
}

// ---------------------------------------------------------------------------
// Network-coded relaying

struct CarryoverState {
  std::size_t n1 = 0;  ///< next-block packets at the relay labelled R1
  std::size_t n2 = 0;  ///< ... at R2
  std::size_t n3 = 0;  ///< ... at the destination

  friend auto operator<=>(const CarryoverState&, const CarryoverState&) = default;
};

struct EquivalentErasures {
  double pe_eq = 0.0;   ///< current-block packets at D in phase two
  double pe_eq2 = 0.0;  ///< current-block packets at the idle relay in phase two
  double pe_eq3 = 0.0;  ///< pure next-block packets at the idle relay
};

inline EquivalentErasures equivalent_erasures(const ErasureNetworkParams& p) {
  return EquivalentErasures{1.0 - p.pe_sd * (1.0 - p.pe_rd), 1.0 - p.pe_sr * (1.0 - p.pe_rr),
                            1.0 - (1.0 - p.pe_sr) * (1.0 - p.pe_rr)};
}

/// Probability that one of two relays holding n1 and n2 carried packets first
/// decodes at time j. Simultaneous decodes belong to the second term.
inline double tilde_q(std::size_t j, const TransmissionPdf& g1, const TransmissionPdf& g2) {
  auto from = [](const TransmissionPdf& g, std::size_t start) {
    double acc = g.tail_mass();
    for (std::size_t k = start; k <= g.support_end(); ++k) acc += g(k);
    return acc;
  };
  return g1(j) * from(g2, j + 1) + g2(j) * from(g1, j);
}

inline double tilde_q(std::size_t K, std::size_t j, std::size_t n1, std::size_t n2, double pe_sr,
                      const TruncationPolicy& policy = {}) {
  return tilde_q(j, aux_g_pdf(K, n1, pe_sr, policy), aux_g_pdf(K, n2, pe_sr, policy));
}

/// Which relay ended phase one in a joint (j, M) outcome.
enum class FirstRelay { none, r1, r2 };

struct JointEntry {
  std::size_t j = 0;  ///< phase-one length (equal to M when D decodes first)
  std::size_t M = 0;
  FirstRelay relay = FirstRelay::none;
  double probability = 0.0;
};

/// Joint law of (relay decode time, destination decode time) for one block of
/// the network-coded scheme, plus its marginal over M.
struct NetcodedJoint {
  std::vector<JointEntry> entries;
  TransmissionPdf marginal;
};

namespace detail {

inline void check_netcoded(const ErasureNetworkParams& params) {
  params.validate();
  if (params.relays != 2) throw ConfigError("network-coded analysis is defined for two relays");
  if (params.pe_sd >= 1.0 && params.pe_rd >= 1.0)
    throw DomainError("netcoded: destination can never decode");
}

inline NetcodedJoint netcoded_compute(const ErasureNetworkParams& params, const CarryoverState& carry,
                                      const TruncationPolicy& policy, bool want_entries) {
  check_netcoded(params);
  const std::size_t K = params.K;
  const RankTables rt(K);
  const double pe_eq = equivalent_erasures(params).pe_eq;
  const std::size_t limit = policy.limit(K);
  std::size_t L = std::min(4 * K, limit);
  while (true) {
    const std::vector<double> g1 = decode_time_raw(rt, carry.n1, params.pe_sr, L);
    const std::vector<double> g2 = decode_time_raw(rt, carry.n2, params.pe_sr, L);
    const std::vector<double> gd = decode_time_raw(rt, carry.n3, params.pe_sd, L);
    const std::vector<double> later1 = survival_from(g1);
    const std::vector<double> later2 = survival_from(g2);

    std::vector<double> q_r1(L + 1), q_r2(L + 1), q(L + 1);
    for (std::size_t j = 0; j <= L; ++j) {
      q_r1[j] = g1[j] * later2[j + 1];
      q_r2[j] = g2[j] * later1[j];
      q[j] = q_r1[j] + q_r2[j];
    }

    NetcodedJoint out;
    std::vector<double> raw(L + 1, 0.0);
    for (std::size_t M = 0; M <= L; ++M) {
      raw[M] = gd[M] * later1[M] * later2[M];
      if (want_entries && raw[M] > 0.0) out.entries.push_back({M, M, FirstRelay::none, raw[M]});
    }
    phase_two_kernel(rt, q, params.pe_sd, pe_eq, carry.n3, L,
                     [&](std::size_t j, std::size_t M, double w) {
                       raw[M] += q[j] * w;
                       if (want_entries) {
                         if (q_r1[j] * w > 0.0) out.entries.push_back({j, M, FirstRelay::r1, q_r1[j] * w});
                         if (q_r2[j] * w > 0.0) out.entries.push_back({j, M, FirstRelay::r2, q_r2[j] * w});
                       }
                     });

    double tail = 0.0;
    if (finalize_composite(raw, K, policy.tol, out.marginal, tail)) {
      if (want_entries) {
        const std::size_t end = out.marginal.support_end();
        const double omega = out.marginal.normalizer();
        std::erase_if(out.entries, [end](const JointEntry& e) { return e.M > end; });
        for (auto& e : out.entries) e.probability /= omega;
      }
      return out;
    }
    if (L >= limit) throw TruncationError("network-coded distribution does not reach tolerance", tail, L);
    L = std::min(2 * L, limit);
  }
}

}  // namespace detail

/// Transmission-count distribution of the network-coded scheme for one block
/// that starts with the given carried packet counts.
inline TransmissionPdf netcoded_pdf(const ErasureNetworkParams& params, const CarryoverState& carry,
                                    const TruncationPolicy& policy = {}) {
  return detail::netcoded_compute(params, carry, policy, false).marginal;
}

inline NetcodedJoint netcoded_joint(const ErasureNetworkParams& params, const CarryoverState& carry,
                                    const TruncationPolicy& policy = {}) {
  return detail::netcoded_compute(params, carry, policy, true);
}

/// Probability that a receiver holding n_held packets can decode after
/// `first` slots over a link with erasure probability pe_first followed by
/// `second` slots with erasure probability pe_second.
inline double decode_by_prob(std::size_t K, std::size_t first, double pe_first, std::size_t second,
                             double pe_second, std::size_t n_held) {
  const std::vector<double> bs = binomial_row(first, pe_first);
  const std::vector<double> bt = binomial_row(second, pe_second);
  double acc = 0.0;
  for (std::size_t s = 0; s <= first; ++s) {
    if (bs[s] == 0.0) continue;
    for (std::size_t t = 0; t <= second; ++t) {
      const std::size_t n = s + t + n_held;
      if (n < K) continue;
      acc += bs[s] * bt[t] * full_rank_cdf(K, n);
    }
  }
  return std::clamp(acc, 0.0, 1.0);
}

/// Probability that the idle relay, holding n_idle carried packets, can decode
/// the current block by time M when phase one lasted j slots: j receptions over
/// the source link and M - j phase-two slots in which only relay-only
/// receptions carry current-block information.
inline double gamma_prob(std::size_t j, std::size_t M, std::size_t n_idle,
                         const ErasureNetworkParams& params) {
  if (M < j) throw DomainError("gamma_prob: M must be at least j");
  return decode_by_prob(params.K, j, params.pe_sr, M - j, equivalent_erasures(params).pe_eq2, n_idle);
}

struct CarryoverPmfs {
  std::vector<double> n1;  ///< point mass at zero
  std::vector<double> n2;
  std::vector<double> n3;
};

/// Distributions of the next-block packet counts handed to the following
/// block. By default the destination count is Binomial(M - j, 1 - pe_sd). With
/// `exclude_decode_slot` it is Binomial(M - j - 1, 1 - pe_sd): the slot in
/// which D decodes is necessarily one where the source packet was erased, so
/// it never contributes a next-block packet.
inline CarryoverPmfs carryover_pmfs(std::size_t j, std::size_t M, bool idle_relay_decoded,
                                    const ErasureNetworkParams& params,
                                    bool exclude_decode_slot = false) {
  if (M < j) throw DomainError("carryover_pmfs: M must be at least j");
  const std::size_t phase2 = M - j;
  const std::size_t d_slots = (exclude_decode_slot && phase2 > 0) ? phase2 - 1 : phase2;
  const double pe_relay = idle_relay_decoded ? params.pe_sr : equivalent_erasures(params).pe_eq3;
  return CarryoverPmfs{{1.0}, binomial_row(phase2, pe_relay), binomial_row(d_slots, params.pe_sd)};
}

// ---------------------------------------------------------------------------
// Multi-block steady state

struct ChainBlock {
  CarryoverState carry_in;
  std::size_t j = 0;
  std::size_t M = 0;
  FirstRelay relay = FirstRelay::none;
  bool idle_relay_decoded = false;
};

struct ChainResult {
  std::vector<ChainBlock> blocks;
  /// Average of the per-block distributions after burn-in.
  TransmissionPdf steady_state;
};

namespace detail {
inline std::size_t sample_index(const std::vector<double>& pmf, Rng& rng) {
  double u = rng.uniform() * std::accumulate(pmf.begin(), pmf.end(), 0.0);
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    if (u < pmf[i]) return i;
    u -= pmf[i];
  }
  return pmf.size() - 1;
}
}  // namespace detail

/// Samples the block chain of the network-coded scheme from the analytic
/// conditionals: (j, M) from the joint law for the current carryover, the
/// idle relay's decode status from gamma_prob, then the next carryover.
inline ChainResult sample_netcoded_chain(const ErasureNetworkParams& params, std::size_t n_blocks,
                                         std::size_t burn_in, std::uint64_t seed,
                                         const TruncationPolicy& policy = {}) {
  if (n_blocks <= burn_in) throw ConfigError("chain needs more blocks than burn-in");
  Rng rng(seed);
  std::map<CarryoverState, NetcodedJoint> cache;
  ChainResult out;
  std::vector<double> mix;
  double mix_tail = 0.0;
  CarryoverState carry{};
  for (std::size_t b = 0; b < n_blocks; ++b) {
    auto it = cache.find(carry);
    if (it == cache.end()) it = cache.emplace(carry, netcoded_joint(params, carry, policy)).first;
    const NetcodedJoint& joint = it->second;

    std::vector<double> w(joint.entries.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = joint.entries[i].probability;
    const JointEntry& e = joint.entries[detail::sample_index(w, rng)];

    ChainBlock blk{carry, e.j, e.M, e.relay, false};
    CarryoverState next{};
    if (e.relay != FirstRelay::none) {
      const std::size_t idle_carry = e.relay == FirstRelay::r1 ? carry.n2 : carry.n1;
      blk.idle_relay_decoded = rng.bernoulli(gamma_prob(e.j, e.M, idle_carry, params));
      const CarryoverPmfs pm = carryover_pmfs(e.j, e.M, blk.idle_relay_decoded, params, true);
      next.n2 = detail::sample_index(pm.n2, rng);
      next.n3 = detail::sample_index(pm.n3, rng);
    }
    out.blocks.push_back(blk);

    if (b >= burn_in) {
      const auto& v = joint.marginal.values();
      if (mix.size() < v.size()) mix.resize(v.size(), 0.0);
      for (std::size_t M = 0; M < v.size(); ++M) mix[M] += v[M];
      mix_tail += joint.marginal.tail_mass();
    }
    carry = next;
  }
  const double count = static_cast<double>(n_blocks - burn_in);
  for (auto& v : mix) v /= count;
  out.steady_state = TransmissionPdf(std::move(mix), mix_tail / count, 1.0);
  return out;
}

}  // namespace ncfountain
