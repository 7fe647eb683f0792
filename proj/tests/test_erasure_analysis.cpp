#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "ncfountain/erasure_analysis.hpp"
#include "ncfountain/gf2_fountain.hpp"
#include "ncfountain/stats.hpp"
#include "oracles.hpp"

using namespace ncfountain;

namespace {

double sum_values(const TransmissionPdf& p) {
  return std::accumulate(p.values().begin(), p.values().end(), 0.0);
}

double survival_at(const TransmissionPdf& p, std::size_t from) {
  double acc = p.tail_mass();
  for (std::size_t M = from; M <= p.support_end(); ++M) acc += p(M);
  return acc;
}

const ErasureNetworkParams kDefaults{};

}  // namespace

TEST(Binomial, Examples) {
  EXPECT_DOUBLE_EQ(binomial_pmf(2, 0.5, 1), 0.5);
  EXPECT_DOUBLE_EQ(binomial_pmf(7, 0.0, 7), 1.0);
  EXPECT_NEAR(binomial_pmf(3, 0.2, 2), 0.384, 1e-14);
  EXPECT_THROW(binomial_pmf(3, 0.2, 4), DomainError);
}

TEST(Binomial, RowSumsToOneForLargeM) {
  const auto row = binomial_row(2000, 0.37);
  EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 1.0, 1e-10);
}

TEST(FullRank, Examples) {
  EXPECT_EQ(full_rank_cdf(100, 99), 0.0);
  EXPECT_NEAR(full_rank_cdf(2, 2), 0.375, 1e-15);
  EXPECT_NEAR(full_rank_cdf(2, 3), 0.65625, 1e-15);
}

TEST(FullRank, MatchesExhaustiveEnumeration) {
  for (std::size_t K = 1; K <= 3; ++K)
    for (std::size_t N = 0; N <= K + 4; ++N) {
      const double exact = static_cast<double>(oracle::count_full_rank_exhaustive(K, N)) /
                           std::exp2(static_cast<double>(K * N));
      const double F = full_rank_cdf(K, N);
      if (exact == 0.0)
        EXPECT_EQ(F, 0.0);
      else
        EXPECT_NEAR(F / exact, 1.0, 1e-12) << "K=" << K << " N=" << N;
    }
  EXPECT_EQ(oracle::count_full_rank_exhaustive(2, 2), 6u);
  EXPECT_EQ(oracle::count_full_rank_exhaustive(2, 3), 42u);
}

TEST(FullRank, PackedRankAgreesWithDenseElimination) {
  for (std::size_t K = 1; K <= 3; ++K)
    for (std::size_t N = 1; N <= 4; ++N)
      for (std::uint64_t b = 0; b < (std::uint64_t{1} << (K * N)); ++b)
        ASSERT_EQ(oracle::small_rank(b, K, N), oracle::rank_of_bits(b, K, N));
}

TEST(FullRank, MatchesColumnCountingUpToK8) {
  for (std::size_t K = 1; K <= 8; ++K)
    for (std::size_t N = K; N <= 12; ++N) {
      const auto count = oracle::count_full_rank_by_columns(K, N);
      const double exact = static_cast<double>(count) / std::exp2(static_cast<double>(K * N));
      EXPECT_NEAR(full_rank_cdf(K, N) / exact, 1.0, 1e-12) << "K=" << K << " N=" << N;
    }
}

TEST(FullRank, MonotoneBoundedAndTailBound) {
  for (std::size_t K : {1u, 7u, 100u}) {
    double prev = 0.0;
    for (std::size_t N = 0; N <= K + 60; ++N) {
      const double F = full_rank_cdf(K, N);
      EXPECT_GE(F, 0.0);
      EXPECT_LE(F, 1.0);
      EXPECT_GE(F, prev);
      if (N >= K + 1) EXPECT_GE(F, 1.0 - 2.0 * std::exp2(static_cast<double>(K) - static_cast<double>(N)));
      EXPECT_NEAR(full_rank_survival(K, N), 1.0 - F, 1e-15);
      prev = F;
    }
  }
}

TEST(DecodePmf, Examples) {
  EXPECT_EQ(decode_pmf(2, 1), 0.0);
  EXPECT_NEAR(decode_pmf(1, 1), 0.5, 1e-15);
  EXPECT_NEAR(decode_pmf(1, 2), 0.25, 1e-15);
}

TEST(DecodePmf, EqualsCdfDifference) {
  for (std::size_t K : {1u, 3u, 10u, 100u})
    for (std::size_t N = K; N <= K + 40; ++N) {
      const double diff = full_rank_cdf(K, N) - (N > 0 ? full_rank_cdf(K, N - 1) : 0.0);
      EXPECT_NEAR(decode_pmf(K, N), diff, 1e-13) << "K=" << K << " N=" << N;
    }
}

TEST(DirectPdf, K1NoErasureHalves) {
  const TransmissionPdf p = direct_pdf(1, 0.0);
  EXPECT_EQ(p(0), 0.0);
  for (std::size_t M = 1; M <= 30; ++M) EXPECT_NEAR(p(M), std::exp2(-static_cast<double>(M)), 1e-12);
}

TEST(DirectPdf, FountainOverheadAtK100) {
  const PdfStats st = pdf_stats(direct_pdf(100, 0.0));
  EXPECT_GT(st.mean, 101.4);
  EXPECT_LT(st.mean, 101.8);
  // Sum over N of (1 - F(N)) gives the same mean.
  double mean = 0.0;
  for (std::size_t N = 0; N < 400; ++N) mean += full_rank_survival(100, N);
  EXPECT_NEAR(st.mean, mean, 1e-9);
}

TEST(DirectPdf, NormalizedWithSmallTail) {
  for (double pe : {0.0, 0.2, 0.4, 0.9}) {
    const TransmissionPdf p = direct_pdf(100, pe);
    EXPECT_NEAR(p.total(), 1.0, 1e-12);
    EXPECT_LT(p.tail_mass(), 1e-9);
    EXPECT_NEAR(p.normalizer(), 1.0, 1e-9);
    EXPECT_GE(p.support_end(), 400u);
  }
}

TEST(DirectPdf, MeanNonincreasingAsErasuresFall) {
  double prev = 1e300;
  for (double pe : {0.8, 0.6, 0.4, 0.2, 0.1, 0.0}) {
    const double mean = pdf_stats(direct_pdf(50, pe)).mean;
    EXPECT_LE(mean, prev);
    prev = mean;
  }
}

TEST(DirectPdf, TruncationErrorWhenSupportTooShort) {
  TruncationPolicy pol{150, 1e-12};
  try {
    direct_pdf(100, 0.4, pol);
    FAIL() << "expected TruncationError";
  } catch (const TruncationError& e) {
    EXPECT_GT(e.achieved_tail, 1e-12);
    EXPECT_EQ(e.support_end, 150u);
  }
  EXPECT_THROW(direct_pdf(100, 0.4, TruncationPolicy{50, 1e-9}), DomainError);
}

TEST(AuxFnp, Examples) {
  EXPECT_EQ(aux_fnp(5, 0, 0), 0.0);
  EXPECT_NEAR(aux_fnp(2, 2, 0), 0.375, 1e-15);
  for (std::size_t N = 1; N < 20; ++N) EXPECT_DOUBLE_EQ(aux_fnp(7, 0, N), decode_pmf(7, N));
}

TEST(AuxG, NoCarryEqualsDirect) {
  const TransmissionPdf g = aux_g_pdf(100, 0, 0.4);
  const TransmissionPdf d = direct_pdf(100, 0.4);
  ASSERT_EQ(g.support_end(), d.support_end());
  for (std::size_t M = 0; M <= d.support_end(); ++M) EXPECT_NEAR(g(M), d(M), 1e-12);
}

TEST(AuxG, K2OneHeldPacket) {
  const TransmissionPdf g = aux_g_pdf(2, 1, 0.0);
  EXPECT_NEAR(aux_fnp(2, 1, 1), 0.375, 1e-15);
  EXPECT_NEAR(g(1), 0.375 / g.normalizer(), 1e-15);
}

TEST(AuxG, EnoughHeldPacketsAllowsImmediateDecode) {
  const TransmissionPdf g = aux_g_pdf(10, 12, 0.3);
  EXPECT_GT(g(0), 0.0);
  EXPECT_NEAR(g(0), full_rank_cdf(10, 12) / g.normalizer(), 1e-15);
  EXPECT_NEAR(g.total(), 1.0, 1e-12);
}

TEST(AuxG, MatchesMonteCarloWithHeldPackets) {
  const std::size_t K = 20, held = 8;
  const double pe = 0.3;
  const TransmissionPdf g = aux_g_pdf(K, held, pe);
  Rng rng(99);
  Histogram h;
  for (int t = 0; t < 40000; ++t) {
    DecoderState d(K, 0);
    for (std::size_t i = 0; i < held; ++i) d.absorb(BitVector::random(K, rng), BitVector(0));
    std::size_t M = 0;
    while (!d.decodable()) {
      ++M;
      if (!rng.bernoulli(pe)) d.absorb(BitVector::random(K, rng), BitVector(0));
    }
    h.add(static_cast<std::int64_t>(M));
  }
  EXPECT_LT(tv_distance(h, g), 0.02);
}

TEST(RelayAny, SingleRelayIsPerRelayPdf) {
  const TransmissionPdf p = direct_pdf(30, 0.2);
  for (std::size_t j = 0; j <= p.support_end(); ++j) EXPECT_NEAR(relay_any_decode_pmf(j, p, 1), p(j), 1e-15);
}

TEST(RelayAny, SumsToOneAndMatchesMinIdentity) {
  const TransmissionPdf p = direct_pdf(100, 0.2);
  for (std::size_t R : {2u, 3u}) {
    double total = 0.0;
    for (std::size_t j = 0; j <= p.support_end(); ++j) {
      const double q = relay_any_decode_pmf(j, p, R);
      total += q;
      const double ge = survival_at(p, j), gt = survival_at(p, j + 1);
      EXPECT_NEAR(q, std::pow(ge, R) - std::pow(gt, R), 1e-12);
    }
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
}

TEST(RelayAny, PointMassStaysPointMass) {
  const TransmissionPdf p = TransmissionPdf::point_mass(120);
  EXPECT_DOUBLE_EQ(relay_any_decode_pmf(120, p, 2), 1.0);
  EXPECT_DOUBLE_EQ(relay_any_decode_pmf(119, p, 2), 0.0);
}

TEST(NaivePdf, NormalizedAndBeatsDirect) {
  const TransmissionPdf n = naive_pdf(kDefaults);
  EXPECT_NEAR(n.total(), 1.0, 1e-12);
  EXPECT_LT(n.tail_mass(), 1e-9);
  EXPECT_NEAR(n.normalizer(), 1.0, 1e-8);
  EXPECT_LT(pdf_stats(n).mean, pdf_stats(direct_pdf(100, 0.4)).mean);
}

TEST(NaivePdf, UselessRelaysGiveDirect) {
  ErasureNetworkParams p = kDefaults;
  p.pe_sr = 1.0;
  const TransmissionPdf n = naive_pdf(p);
  const TransmissionPdf d = direct_pdf(100, p.pe_sd);
  for (std::size_t M = 0; M <= std::max(n.support_end(), d.support_end()); ++M) EXPECT_NEAR(n(M), d(M), 1e-12);
}

TEST(NaivePdf, SingleRelayMatchesMonteCarloOfSameModel) {
  // Small K so an exact enumeration of the two phases is cheap.
  ErasureNetworkParams p;
  p.K = 6;
  p.relays = 1;
  p.pe_sd = 0.5;
  p.pe_sr = 0.1;
  p.pe_rd = 0.3;
  const TransmissionPdf n = naive_pdf(p);
  Rng rng(5);
  Histogram h;
  for (int t = 0; t < 60000; ++t) {
    DecoderState d(6, 0), r(6, 0);
    std::size_t M = 0;
    while (!d.decodable() && !r.decodable()) {
      ++M;
      const BitVector v = BitVector::random(6, rng);
      if (!rng.bernoulli(p.pe_sr)) r.absorb(v, BitVector(0));
      if (!rng.bernoulli(p.pe_sd)) d.absorb(v, BitVector(0));
    }
    while (!d.decodable()) {
      ++M;
      const BitVector v = BitVector::random(6, rng);
      if (!rng.bernoulli(p.pe_rd)) d.absorb(v, BitVector(0));
    }
    h.add(static_cast<std::int64_t>(M));
  }
  EXPECT_LT(tv_distance(h, n), 0.02);
}

TEST(EquivalentErasures, Examples) {
  const EquivalentErasures e = equivalent_erasures(kDefaults);
  EXPECT_NEAR(e.pe_eq, 0.68, 1e-15);
  EXPECT_NEAR(e.pe_eq2, 0.84, 1e-15);
  EXPECT_NEAR(e.pe_eq3, 0.36, 1e-15);
  ErasureNetworkParams perfect;
  perfect.pe_sd = perfect.pe_sr = perfect.pe_rd = perfect.pe_rr = 0.0;
  const EquivalentErasures z = equivalent_erasures(perfect);
  EXPECT_EQ(z.pe_eq, 1.0);
  EXPECT_EQ(z.pe_eq2, 1.0);
  EXPECT_EQ(z.pe_eq3, 0.0);
  const double useful = (1 - kDefaults.pe_rd) + (1 - kDefaults.pe_sd) * kDefaults.pe_rd;
  EXPECT_NEAR(useful, 0.92, 1e-15);
  EXPECT_GT(useful, 1 - kDefaults.pe_rd);
}

TEST(TildeQ, SumsToOneWithoutCarry) {
  const TransmissionPdf g = aux_g_pdf(100, 0, 0.2);
  double total = 0.0;
  for (std::size_t j = 0; j <= g.support_end(); ++j) total += tilde_q(j, g, g);
  EXPECT_NEAR(total, 1.0, 1e-9);
}

TEST(TildeQ, HeavilyCarriedRelayDecodesAtOnce) {
  EXPECT_NEAR(tilde_q(100, 0, 130, 0, 0.2), 1.0, 1e-8);
}

TEST(TildeQ, TieBelongsToSecondTerm) {
  const TransmissionPdf g1 = aux_g_pdf(10, 3, 0.2);
  const TransmissionPdf g2 = aux_g_pdf(10, 3, 0.2);
  const std::size_t j = 10;
  const double first = g1(j) * survival_at(g2, j + 1);
  const double second = g2(j) * survival_at(g1, j);
  EXPECT_NEAR(tilde_q(j, g1, g2), first + second, 1e-15);
}

TEST(TildeQ, MatchesMonteCarloMinimumDecodeTime) {
  const std::size_t K = 30, n = 10;
  const double pe = 0.2;
  const TransmissionPdf g = aux_g_pdf(K, n, pe);
  std::vector<double> q(g.support_end() + 1);
  for (std::size_t j = 0; j < q.size(); ++j) q[j] = tilde_q(j, g, g);
  Rng rng(123);
  std::vector<double> emp(q.size(), 0.0);
  const int trials = 40000;
  for (int t = 0; t < trials; ++t) {
    DecoderState a(K, 0), b(K, 0);
    for (std::size_t i = 0; i < n; ++i) {
      a.absorb(BitVector::random(K, rng), BitVector(0));
      b.absorb(BitVector::random(K, rng), BitVector(0));
    }
    std::size_t j = 0;
    while (!a.decodable() && !b.decodable()) {
      ++j;
      const BitVector v = BitVector::random(K, rng);
      if (!rng.bernoulli(pe)) a.absorb(v, BitVector(0));
      if (!rng.bernoulli(pe)) b.absorb(v, BitVector(0));
    }
    emp[std::min(j, emp.size() - 1)] += 1.0 / trials;
  }
  EXPECT_LT(tv_distance(emp, q), 0.02);
}

TEST(NetcodedPdf, NormalizedAtZeroCarry) {
  const TransmissionPdf p = netcoded_pdf(kDefaults, {});
  EXPECT_NEAR(p.total(), 1.0, 1e-12);
  EXPECT_LT(p.tail_mass(), 1e-9);
  EXPECT_NEAR(p.normalizer(), 1.0, 1e-8);
  EXPECT_EQ(p(50), 0.0);
}

TEST(NetcodedPdf, UselessRelaysGiveDirect) {
  ErasureNetworkParams p = kDefaults;
  p.pe_sr = 1.0;
  p.pe_rd = 1.0;
  const TransmissionPdf n = netcoded_pdf(p, {});
  const TransmissionPdf d = direct_pdf(100, p.pe_sd);
  for (std::size_t M = 0; M <= std::max(n.support_end(), d.support_end()); ++M) EXPECT_NEAR(n(M), d(M), 1e-12);
}

TEST(NetcodedPdf, DeadRelayLinkCannotBeTruncated) {
  ErasureNetworkParams p = kDefaults;
  p.pe_rd = 1.0;
  EXPECT_THROW(netcoded_pdf(p, {}), TruncationError);
}

TEST(NetcodedPdf, CarriedPacketsAllowFewerThanK) {
  const TransmissionPdf p = netcoded_pdf(kDefaults, {0, 0, 110});
  double below = 0.0;
  for (std::size_t M = 0; M < 100; ++M) below += p(M);
  EXPECT_GT(below, 0.0);
  EXPECT_NEAR(p.total(), 1.0, 1e-12);
}

TEST(NetcodedPdf, JointMarginalsAgree) {
  const NetcodedJoint j = netcoded_joint(kDefaults, {0, 40, 30});
  std::vector<double> marg(j.marginal.support_end() + 1, 0.0);
  for (const auto& e : j.entries) {
    EXPECT_LE(e.j, e.M);
    if (e.relay == FirstRelay::none) EXPECT_EQ(e.j, e.M);
    marg[e.M] += e.probability;
  }
  for (std::size_t M = 0; M < marg.size(); ++M) EXPECT_NEAR(marg[M], j.marginal(M), 1e-12);
}

TEST(NetcodedPdf, ZeroCarryMatchesMonteCarloOfSameModel) {
  // One block of the network-coded protocol at small K, simulated with
  // independent rank trackers only.
  ErasureNetworkParams p;
  p.K = 8;
  const TransmissionPdf pdf = netcoded_pdf(p, {});
  const double pe_eq = equivalent_erasures(p).pe_eq;
  Rng rng(31);
  Histogram h;
  for (int t = 0; t < 60000; ++t) {
    DecoderState d(8, 0), r1(8, 0), r2(8, 0);
    std::size_t M = 0;
    while (!d.decodable() && !r1.decodable() && !r2.decodable()) {
      ++M;
      const BitVector v = BitVector::random(8, rng);
      if (!rng.bernoulli(p.pe_sr)) r1.absorb(v, BitVector(0));
      if (!rng.bernoulli(p.pe_sr)) r2.absorb(v, BitVector(0));
      if (!rng.bernoulli(p.pe_sd)) d.absorb(v, BitVector(0));
    }
    while (!d.decodable()) {
      ++M;
      const BitVector v = BitVector::random(8, rng);
      if (!rng.bernoulli(pe_eq)) d.absorb(v, BitVector(0));
    }
    h.add(static_cast<std::int64_t>(M));
  }
  EXPECT_LT(tv_distance(h, pdf), 0.02);
}

TEST(Gamma, TooFewPacketsGivesZero) {
  EXPECT_EQ(gamma_prob(40, 90, 0, kDefaults), 0.0);
}

TEST(Gamma, LosslessLinksGiveFullRankCdf) {
  for (std::size_t M : {100u, 103u, 110u})
    EXPECT_NEAR(decode_by_prob(100, 60, 0.0, M - 60, 0.0, 0), full_rank_cdf(100, M), 1e-15);
}

TEST(Gamma, MatchesIdleRelayMonteCarlo) {
  const std::size_t j = 120, M = 160;
  const double gamma = gamma_prob(j, M, 0, kDefaults);
  const double pe2 = equivalent_erasures(kDefaults).pe_eq2;
  Rng rng(2718);
  const int trials = 20000;
  int ok = 0;
  for (int t = 0; t < trials; ++t) {
    DecoderState r(100, 0);
    for (std::size_t s = 0; s < M && !r.decodable(); ++s)
      if (!rng.bernoulli(s < j ? kDefaults.pe_sr : pe2)) r.absorb(BitVector::random(100, rng), BitVector(0));
    ok += r.decodable();
  }
  EXPECT_NEAR(static_cast<double>(ok) / trials, gamma, 0.02);
}

TEST(Carryover, Examples) {
  const CarryoverPmfs none = carryover_pmfs(50, 50, false, kDefaults);
  EXPECT_EQ(none.n2, std::vector<double>{1.0});
  EXPECT_EQ(none.n3, std::vector<double>{1.0});
  EXPECT_EQ(none.n1, std::vector<double>{1.0});

  const CarryoverPmfs one = carryover_pmfs(50, 51, true, kDefaults);
  ASSERT_EQ(one.n3.size(), 2u);
  EXPECT_NEAR(one.n3[0], 0.4, 1e-15);
  EXPECT_NEAR(one.n3[1], 0.6, 1e-15);

  const CarryoverPmfs two = carryover_pmfs(50, 52, false, kDefaults);
  EXPECT_NEAR(two.n2[2], 0.4096, 1e-15);
}

TEST(Carryover, DecodeSlotExclusionDropsOneTrial) {
  const CarryoverPmfs c = carryover_pmfs(50, 60, true, kDefaults, true);
  EXPECT_EQ(c.n3.size(), 10u);
  EXPECT_EQ(c.n2.size(), 11u);
  for (const auto* pmf : {&c.n2, &c.n3}) EXPECT_NEAR(std::accumulate(pmf->begin(), pmf->end(), 0.0), 1.0, 1e-12);
}

TEST(PdfStats, PointMass) {
  const PdfStats st = pdf_stats(TransmissionPdf::point_mass(100));
  EXPECT_EQ(st.mean, 100.0);
  EXPECT_EQ(st.variance, 0.0);
  EXPECT_EQ(st.tail_mass, 0.0);
}

TEST(Chain, SteadyStateBeatsNaiveWithLargerVariance) {
  const ChainResult chain = sample_netcoded_chain(kDefaults, 220, 20, 17);
  EXPECT_EQ(chain.blocks.size(), 220u);
  EXPECT_NEAR(chain.steady_state.total(), 1.0, 1e-9);
  const PdfStats nc = pdf_stats(chain.steady_state);
  const PdfStats nv = pdf_stats(naive_pdf(kDefaults));
  const PdfStats dr = pdf_stats(direct_pdf(100, 0.4));
  EXPECT_LT(nc.mean, nv.mean);
  EXPECT_LT(nv.mean, dr.mean);
  EXPECT_GT(nc.variance, nv.variance);
  for (const ChainBlock& b : chain.blocks) {
    EXPECT_LE(b.j, b.M);
    EXPECT_EQ(b.carry_in.n1, 0u);
  }
}
