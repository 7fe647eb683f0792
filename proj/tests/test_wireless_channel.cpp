#include <gtest/gtest.h>

#include <cmath>

#include "ncfountain/erasure_analysis.hpp"
#include "ncfountain/stats.hpp"
#include "ncfountain/wireless_channel.hpp"

using namespace ncfountain;

namespace {

double frac(std::size_t hits, std::size_t n) { return static_cast<double>(hits) / static_cast<double>(n); }

double three_sigma(double p, std::size_t n) { return 3 * std::sqrt(p * (1 - p) / static_cast<double>(n)); }

}  // namespace

TEST(Gain, ExponentialMomentsAndTail) {
  Rng rng(1);
  const double lambda = 8.0;
  const int n = 200000;
  double sum = 0.0;
  int above = 0;
  for (int i = 0; i < n; ++i) {
    const double g = sample_gain(lambda, rng);
    ASSERT_GE(g, 0.0);
    sum += g;
    above += g > 0.25;
  }
  EXPECT_NEAR(sum / n, 1 / lambda, 4 * (1 / lambda) / std::sqrt(n));
  const double p = std::exp(-lambda * 0.25);
  EXPECT_NEAR(frac(above, n), p, three_sigma(p, n));
  EXPECT_THROW(sample_gain(0.0, rng), DomainError);
}

TEST(Gain, TopologyRates) {
  const Topology t;
  EXPECT_DOUBLE_EQ(t.lambda(10.0), 1000.0);
  const WirelessParams w = WirelessParams::from_topology(t, 1e6);
  EXPECT_DOUBLE_EQ(w.lambda_sd, 8000.0);
  EXPECT_DOUBLE_EQ(w.lambda_rr, 125.0);
  EXPECT_DOUBLE_EQ(w.chi(), 3.0);
  EXPECT_DOUBLE_EQ(outage_threshold(512, 8, 1040), 1.0);
}

TEST(Outage, Examples) {
  EXPECT_NEAR(link_erasure_prob(1.0, 10.0, 512, 8, 1040), 0.09516258196404048, 1e-12);
  EXPECT_NEAR(link_erasure_prob(1.0, 30.0, 1024, 16, 1040), 0.09516258196404048, 1e-12);
  EXPECT_LT(link_erasure_prob(1.0, 1e9, 1024, 16, 1040), 1e-8);
  EXPECT_GT(link_erasure_prob(1.0, 1e-6, 1024, 16, 1040), 1 - 1e-9);
  EXPECT_THROW(link_erasure_prob(1.0, 0.0, 1024, 16, 1040), DomainError);
}

TEST(Outage, MonotoneInSnrAndDistance) {
  const Topology t;
  double prev = 1.0;
  for (double db = 40; db <= 80; db += 5) {
    const WirelessParams w = WirelessParams::from_topology(t, std::pow(10.0, db / 10));
    const ErasureNetworkParams p = equivalent_erasure_network(w, 100);
    EXPECT_LT(p.pe_sd, prev);
    EXPECT_GT(p.pe_sd, p.pe_sr);
    EXPECT_DOUBLE_EQ(p.pe_sr, p.pe_rd);
    EXPECT_GT(p.pe_sr, p.pe_rr);
    prev = p.pe_sd;
  }
}

TEST(Outage, FadingChannelErasureFrequency) {
  const WirelessParams w = WirelessParams::from_topology(Topology{}, 1e4);
  const FadingChannel ch{w};
  Rng rng(3);
  const std::size_t n = 100000;
  for (Link link : {Link::sd, Link::sr, Link::rr}) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) hits += ch.erased(link, rng);
    const double p = link_erasure_prob(ch.lambda(link), w);
    EXPECT_NEAR(frac(hits, n), p, three_sigma(p, n) + 1e-12);
  }
}

TEST(Sic, DecodeOrderAndCancellation) {
  // Relay stronger and decodable over the source; source then decodable alone.
  SlotOutcome o = sic_decode(1.0, 10.0, 10.0, 0.5);
  EXPECT_TRUE(o.relay_first);
  EXPECT_TRUE(o.decoded_from_r);
  EXPECT_TRUE(o.decoded_from_s);
  // Both weak: nothing decodes.
  o = sic_decode(0.01, 0.02, 10.0, 3.0);
  EXPECT_FALSE(o.decoded_from_r);
  EXPECT_FALSE(o.decoded_from_s);
  // Strong source decodes, weak relay fails alone.
  o = sic_decode(10.0, 0.01, 10.0, 1.0);
  EXPECT_FALSE(o.relay_first);
  EXPECT_TRUE(o.decoded_from_s);
  EXPECT_FALSE(o.decoded_from_r);
  // Comparable gains: the first SINR stays low, so the second is never tried.
  o = sic_decode(1.0, 1.0, 100.0, 3.0);
  EXPECT_FALSE(o.decoded_from_r);
  EXPECT_FALSE(o.decoded_from_s);
  // Equal gains go to the relay.
  EXPECT_TRUE(sic_decode(2.0, 2.0, 1.0, 1.0).relay_first);
}

TEST(Sic, ClosedFormsMatchTheirDefiningEvents) {
  struct Case {
    double ls, lr, snr, chi;
  };
  for (const Case c : {Case{8000, 1092.727, 1e6, 3.0}, Case{1092.727, 125.0, 1e5, 3.0}, Case{2.0, 1.0, 5.0, 0.7}}) {
    const SicClosedForms cf = sic_closed_forms(c.ls, c.lr, c.snr, c.chi);
    Rng rng(77);
    const std::size_t n = 200000;
    std::size_t order_a = 0, r_a = 0, s_a = 0, s_b = 0, r_b = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double gs = sample_gain(c.ls, rng);
      const double gr = sample_gain(c.lr, rng);
      order_a += gr > gs;
      r_a += gr * c.snr / (gs * c.snr + 1) <= c.chi;
      s_a += gs * c.snr <= c.chi;
      s_b += gs * c.snr / (gr * c.snr + 1) <= c.chi;
      r_b += gr * c.snr <= c.chi;
    }
    EXPECT_NEAR(frac(order_a, n), cf.p_order_a, three_sigma(cf.p_order_a, n) + 1e-9);
    EXPECT_NEAR(frac(r_a, n), cf.pe_r_a, three_sigma(cf.pe_r_a, n) + 1e-9);
    EXPECT_NEAR(frac(s_a, n), cf.pe_s_a, three_sigma(cf.pe_s_a, n) + 1e-9);
    EXPECT_NEAR(frac(s_b, n), cf.pe_s_b, three_sigma(cf.pe_s_b, n) + 1e-9);
    EXPECT_NEAR(frac(r_b, n), cf.pe_r_b, three_sigma(cf.pe_r_b, n) + 1e-9);
  }
}

TEST(Sic, ClassifyTargets) {
  EXPECT_EQ(classify_phase2_wireless({false, false, false}), (BufferTargets{}));
  EXPECT_EQ(classify_phase2_wireless({true, true, false}), (BufferTargets{true, false, false}));
  EXPECT_EQ(classify_phase2_wireless({false, false, true}), (BufferTargets{false, true, false}));
  EXPECT_EQ(classify_phase2_wireless({true, true, true}), (BufferTargets{true, false, true}));
}

TEST(Capacity, Examples) {
  EXPECT_EQ(capacity(0.0), 0.0);
  EXPECT_DOUBLE_EQ(capacity(3.0), 1.0);
  EXPECT_DOUBLE_EQ(capacity(15.0), 2.0);
  EXPECT_DOUBLE_EQ(capacity(15.0, 0.2), 1.0);
  EXPECT_DOUBLE_EQ(capacity(6.0, 0.5), 1.0);
  EXPECT_THROW(capacity(-1.0), DomainError);
  EXPECT_THROW(capacity(1.0, 0.0), DomainError);
}

TEST(Mac, Extremes) {
  const double h_sd = 0.3, h_rd = 0.8, snr = 50.0;
  const MacRates all_current = mac_corner_rates(1.0, h_sd, h_rd, snr);
  EXPECT_EQ(all_current.next, 0.0);
  EXPECT_DOUBLE_EQ(all_current.current, capacity((h_sd + h_rd) * (h_sd + h_rd) * snr));
  const MacRates relay_only = mac_corner_rates(0.0, h_sd, h_rd, snr);
  EXPECT_DOUBLE_EQ(relay_only.current, capacity(h_rd * h_rd * snr));
  EXPECT_GT(relay_only.next, 0.0);
  EXPECT_THROW(mac_corner_rates(1.5, h_sd, h_rd, snr), DomainError);
}

TEST(Mac, CornerRespectsRegionAndSumRateGrowsWithAlpha) {
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    const double h_sd = std::sqrt(sample_gain(1.0, rng));
    const double h_rd = std::sqrt(sample_gain(1.0, rng));
    const double snr = 0.1 + 100 * rng.uniform();
    const double gap = t % 2 == 0 ? 1.0 : 0.1 + 0.9 * rng.uniform();
    double prev = -1.0;
    for (double a = 0.0; a <= 1.0 + 1e-12; a += 0.125) {
      const MacRates r = mac_corner_rates(a, h_sd, h_rd, snr, gap);
      const double g = a * h_sd + h_rd;
      const double b2 = 1 - a * a;
      EXPECT_LE(r.current, capacity(g * g * snr, gap) + 1e-12);
      EXPECT_LE(r.next, capacity(b2 * h_sd * h_sd * snr, gap) + 1e-12);
      const double sum = r.current + r.next;
      EXPECT_LE(sum, capacity((g * g + b2 * h_sd * h_sd) * snr, gap) + 1e-12);
      if (gap == 1.0) EXPECT_NEAR(sum, capacity((g * g + b2 * h_sd * h_sd) * snr), 1e-12);
      if (gap == 1.0) EXPECT_GE(sum, prev - 1e-12);
      prev = sum;
    }
  }
  // Without a gap the corner attains the sum capacity exactly.
  const MacRates r = mac_corner_rates(0.4, 0.5, 0.7, 20.0);
  const double g = 0.4 * 0.5 + 0.7;
  EXPECT_NEAR(r.current + r.next, capacity((g * g + 0.84 * 0.25) * 20.0), 1e-12);
}

TEST(Alpha, OperatingPointExamples) {
  const double h_sd = 0.6, h_rd = 0.9, snr = 30.0;
  EXPECT_EQ(solve_alpha_operating_point(h_sd, h_rd, snr, capacity(h_rd * h_rd * snr)), 0.0);
  EXPECT_EQ(relay_only_alpha(h_sd, h_rd, snr), 0.0);
  const double top = mac_corner_rates(1.0, h_sd, h_rd, snr).current;
  const auto near_one = solve_alpha_operating_point(h_sd, h_rd, snr, top);
  ASSERT_TRUE(near_one.has_value());
  EXPECT_NEAR(*near_one, 1.0, 1e-9);
  EXPECT_FALSE(solve_alpha_operating_point(h_sd, h_rd, snr, top + 0.01).has_value());
  const double mid = 0.5 * (capacity(h_rd * h_rd * snr) + top);
  const auto a = solve_alpha_operating_point(h_sd, h_rd, snr, mid);
  ASSERT_TRUE(a.has_value());
  EXPECT_NEAR(mac_corner_rates(*a, h_sd, h_rd, snr).current, mid, 1e-9);
}

TEST(Approach2, FixedGainsGiveDeterministicSlotCount) {
  Approach2Config cfg;
  cfg.wireless.snr = 3.0;
  cfg.fixed_gain = true;
  const std::size_t expected = static_cast<std::size_t>(std::ceil(100.0 * 1024.0 / 1040.0));
  for (Scheme s : {Scheme::direct, Scheme::naive, Scheme::netcoded}) {
    cfg.scheme = s;
    const auto blocks = simulate_approach2(cfg, 1);
    ASSERT_EQ(blocks.size(), 1u);
    EXPECT_EQ(blocks.front().slots, expected) << to_string(s);
  }
}

TEST(Approach2, FullCurrentWeightLeavesNoCarry) {
  Approach2Config cfg;
  cfg.wireless = WirelessParams::from_topology(Topology{}, 1e6);
  cfg.alpha_policy = AlphaPolicy::fixed;
  cfg.wireless.alpha_weight = 1.0;
  cfg.n_blocks = 50;
  for (const Approach2Block& b : simulate_approach2(cfg, 9)) {
    EXPECT_EQ(b.carry_in_d, 0.0);
    EXPECT_EQ(b.carry_in_idle, 0.0);
    if (b.slots > b.phase1_slots) EXPECT_DOUBLE_EQ(b.alpha_mean, 1.0);
  }
}

TEST(Approach2, CreditsRespectTheFlowBound) {
  Approach2Config cfg;
  cfg.wireless = WirelessParams::from_topology(Topology{}, 1e6);
  cfg.n_blocks = 200;
  const double need = cfg.block_bits();
  for (double alpha : {0.0, 0.5, 1.0}) {
    cfg.alpha_policy = alpha == 0.0 ? AlphaPolicy::automatic : AlphaPolicy::fixed;
    cfg.wireless.alpha_weight = alpha;
    for (const Approach2Block& b : simulate_approach2(cfg, 11)) {
      EXPECT_LE(b.credited_d, b.credit_bound * (1 + 1e-12));
      EXPECT_LE(b.carry_in_d, need);
      EXPECT_LE(b.carry_in_idle, need);
      EXPECT_LE(b.phase1_slots, b.slots);
      EXPECT_GE(b.alpha_mean, 0.0);
      EXPECT_LE(b.alpha_mean, 1.0);
    }
  }
}

TEST(Approach2, DeterministicPerSeed) {
  Approach2Config cfg;
  cfg.wireless = WirelessParams::from_topology(Topology{}, 1e6);
  cfg.n_blocks = 20;
  const auto a = simulate_approach2(cfg, 4);
  const auto b = simulate_approach2(cfg, 4);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].slots, b[i].slots);
    EXPECT_EQ(a[i].carry_in_d, b[i].carry_in_d);
  }
}

TEST(Approach2, DeadChannelRunsAway) {
  Approach2Config cfg;
  cfg.K = 4;
  cfg.wireless.snr = 1e-300;
  cfg.scheme = Scheme::direct;
  EXPECT_THROW(simulate_approach2(cfg, 1), RunawayError);
}

TEST(Approach1, HighSnrApproachesLosslessFountain) {
  const WirelessParams w = WirelessParams::from_topology(Topology{}, 1e13);
  SimConfig cfg;
  const double lossless = pdf_stats(direct_pdf(100, 0.0)).mean;
  for (Scheme s : {Scheme::direct, Scheme::naive, Scheme::netcoded}) {
    const BatchResult r = simulate_approach1(s, cfg, w, 2000, 8);
    EXPECT_NEAR(r.summary.mean / lossless, 1.0, 0.01) << to_string(s);
  }
}

TEST(Approach1, DirectMatchesOutageAnalytic) {
  const WirelessParams w = WirelessParams::from_topology(Topology{}, 1e5);
  SimConfig cfg;
  const BatchResult r = simulate_approach1(Scheme::direct, cfg, w, 10000, 21);
  const double pe = link_erasure_prob(w.lambda_sd, w);
  EXPECT_NEAR(r.summary.mean / pdf_stats(direct_pdf(100, pe)).mean, 1.0, 0.01);
}
