#pragma once

// Experiment configuration, the analyze / simulate / sweep-snr commands and
// their JSON and CSV result formats.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "ncfountain/erasure_analysis.hpp"
#include "ncfountain/errors.hpp"
#include "ncfountain/protocol_sim.hpp"
#include "ncfountain/stats.hpp"
#include "ncfountain/wireless_channel.hpp"

namespace ncfountain {

using json = nlohmann::json;

inline constexpr const char* kToolName = "ncfountain";
inline constexpr const char* kToolVersion = "1.0.0";

enum class ChannelMode { erasure, wireless_approach1, wireless_approach2 };

inline const char* to_string(ChannelMode c) {
  switch (c) {
    case ChannelMode::erasure: return "erasure";
    case ChannelMode::wireless_approach1: return "wireless_approach1";
    case ChannelMode::wireless_approach2: return "wireless_approach2";
  }
  return "?";
}

inline ChannelMode parse_channel(const std::string& s) {
  if (s == "erasure") return ChannelMode::erasure;
  if (s == "wireless_approach1") return ChannelMode::wireless_approach1;
  if (s == "wireless_approach2") return ChannelMode::wireless_approach2;
  throw ConfigError("unknown channel '" + s + "'");
}

inline Scheme parse_scheme(const std::string& s) {
  if (s == "direct") return Scheme::direct;
  if (s == "naive") return Scheme::naive;
  if (s == "netcoded") return Scheme::netcoded;
  throw ConfigError("unknown scheme '" + s + "'");
}

/// Inclusive dB grid start:stop:step.
struct SnrGrid {
  double start = 40.0;
  double stop = 80.0;
  double step = 5.0;

  static SnrGrid parse(const std::string& text) {
    SnrGrid g;
    double* fields[3] = {&g.start, &g.stop, &g.step};
    std::size_t pos = 0;
    for (int i = 0; i < 3; ++i) {
      const std::size_t colon = text.find(':', pos);
      if ((i < 2) != (colon != std::string::npos))
        throw ConfigError("SNR grid must look like start:stop:step, got '" + text + "'");
      const std::string part = text.substr(pos, i < 2 ? colon - pos : std::string::npos);
      const char* end = part.data() + part.size();
      auto [ptr, ec] = std::from_chars(part.data(), end, *fields[i]);
      if (ec != std::errc() || ptr != end || part.empty())
        throw ConfigError("SNR grid field '" + part + "' is not a number");
      pos = colon + 1;
    }
    g.validate();
    return g;
  }

  void validate() const {
    if (!std::isfinite(start) || !std::isfinite(stop) || !(step > 0.0))
      throw ConfigError("SNR grid needs finite bounds and a positive step");
    if (stop < start) throw ConfigError("SNR grid stop lies below start");
  }

  std::vector<double> points() const {
    validate();
    std::vector<double> pts;
    for (std::size_t i = 0;; ++i) {
      const double x = start + static_cast<double>(i) * step;
      if (x > stop + 1e-9 * step) break;
      pts.push_back(x);
    }
    return pts;
  }

  std::string to_string() const {
    auto fmt = [](double v) {
      char buf[64];
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
      return std::string(buf, ptr);
    };
    return fmt(start) + ":" + fmt(stop) + ":" + fmt(step);
  }
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

struct ExperimentConfig {
  std::string scheme = "all";  ///< direct, naive, netcoded or all
  ChannelMode channel = ChannelMode::erasure;
  ErasureNetworkParams erasure;
  std::size_t m = kDefaultPacketBits;
  std::size_t mu = kDefaultHeaderBits;
  std::size_t n = kDefaultPacketBits + kDefaultHeaderBits;
  Topology topology;
  double snr_db = 60.0;
  SnrGrid snr_grid;
  double gamma_gap_db = 0.0;  ///< SNR gap as a penalty in dB (0 = none)
  AlphaPolicy alpha_policy = AlphaPolicy::automatic;
  double alpha = 0.0;  ///< used when alpha_policy is fixed
  bool fixed_gain = false;
  std::size_t trials = 10000;
  std::optional<std::uint64_t> seed;
  std::size_t blocks = 1;
  std::size_t burn_in = 20;
  std::optional<CarryoverState> carryover;  ///< analyze: fixed carryover instead of steady state
  std::size_t chain_blocks = 220;
  double tol = 1e-9;
  std::size_t m_max = 0;
  bool verify_payloads = false;
  unsigned threads = 1;
  std::string out;
  std::string format = "json";

  std::vector<Scheme> schemes() const {
    if (scheme == "all") return {Scheme::direct, Scheme::naive, Scheme::netcoded};
    return {parse_scheme(scheme)};
  }

  std::size_t effective_burn_in() const { return blocks > 1 ? burn_in : 0; }

  TruncationPolicy truncation() const { return TruncationPolicy{m_max, tol}; }

  SimConfig sim_config() const {
    SimConfig c;
    c.params = erasure;
    c.m = m;
    c.mu = mu;
    c.n_blocks = blocks;
    c.burn_in = effective_burn_in();
    c.carry_payload = verify_payloads;
    c.seed = *seed;
    return c;
  }

  WirelessParams wireless(double at_snr_db) const {
    WirelessParams w = WirelessParams::from_topology(topology, db_to_linear(at_snr_db));
    w.m = m;
    w.mu = mu;
    w.n = n;
    w.gamma_gap = db_to_linear(-gamma_gap_db);
    w.alpha_weight = alpha_policy == AlphaPolicy::fixed ? alpha : 0.0;
    return w;
  }

  void validate() const {
    schemes();
    erasure.validate();
    topology.validate();
    if (!seed) throw ConfigError("a seed is required");
    if (trials == 0) throw ConfigError("trials must be at least 1");
    if (blocks == 0) throw ConfigError("blocks must be at least 1");
    if (blocks > 1 && burn_in >= blocks) throw ConfigError("burn_in must be smaller than blocks");
    if (chain_blocks <= burn_in) throw ConfigError("chain_blocks must exceed burn_in");
    if (n == 0) throw ConfigError("n must be at least 1");
    if (!(tol > 0.0 && tol < 1.0)) throw ConfigError("tol must lie in (0, 1)");
    if (m_max != 0 && m_max < erasure.K) throw ConfigError("m_max must be at least K");
    if (!(gamma_gap_db >= 0.0) || !std::isfinite(gamma_gap_db))
      throw ConfigError("gamma_gap_db must be a nonnegative penalty");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
    if (!std::isfinite(snr_db)) throw ConfigError("snr_db must be finite");
    if (threads == 0) throw ConfigError("threads must be at least 1");
    if (format != "json" && format != "csv") throw ConfigError("format must be json or csv");
    snr_grid.validate();
    if (channel != ChannelMode::erasure) wireless(snr_db).validate();
  }
};

// ---------------------------------------------------------------------------
// Config serialization

namespace detail {

template <class T>
T get_as(const json& j, const char* key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

inline std::size_t get_count(const json& j, const char* key) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    throw ConfigError(std::string("config key '") + key + "' must be a nonnegative integer");
  return j.get<std::size_t>();
}

inline double get_real(const json& j, const char* key) {
  if (!j.is_number()) throw ConfigError(std::string("config key '") + key + "' must be a number");
  return j.get<double>();
}

}  // namespace detail

/// Config echo. Every field is written, so parsing it back yields the same run.
inline json to_json(const ExperimentConfig& c) {
  json j;
  j["scheme"] = c.scheme;
  j["channel"] = to_string(c.channel);
  j["pe_sd"] = c.erasure.pe_sd;
  j["pe_sr"] = c.erasure.pe_sr;
  j["pe_rd"] = c.erasure.pe_rd;
  j["pe_rr"] = c.erasure.pe_rr;
  j["K"] = c.erasure.K;
  j["relays"] = c.erasure.relays;
  j["m"] = c.m;
  j["mu"] = c.mu;
  j["n"] = c.n;
  j["d_sd"] = c.topology.d_sd;
  j["d_sr"] = c.topology.d_sr;
  j["d_rd"] = c.topology.d_rd;
  j["d_rr"] = c.topology.d_rr;
  j["path_loss_exponent"] = c.topology.path_loss_exponent;
  j["snr_db"] = c.snr_db;
  j["snr_db_grid"] = c.snr_grid.to_string();
  j["gamma_gap_db"] = c.gamma_gap_db;
  if (c.alpha_policy == AlphaPolicy::automatic)
    j["alpha"] = "auto";
  else
    j["alpha"] = c.alpha;
  j["fixed_gain"] = c.fixed_gain;
  j["trials"] = c.trials;
  j["seed"] = c.seed ? json(*c.seed) : json(nullptr);
  j["blocks"] = c.blocks;
  j["burn_in"] = c.burn_in;
  j["carryover"] = c.carryover ? json::array({c.carryover->n1, c.carryover->n2, c.carryover->n3})
                               : json(nullptr);
  j["chain_blocks"] = c.chain_blocks;
  j["tol"] = c.tol;
  j["m_max"] = c.m_max;
  j["verify_payloads"] = c.verify_payloads;
  j["threads"] = c.threads;
  j["out"] = c.out;
  j["format"] = c.format;
  return j;
}

/// Overlays the keys present in `j` onto `base`. Unknown keys are rejected.
inline ExperimentConfig config_from_json(const json& j, ExperimentConfig base = {}) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig& c = base;
  for (const auto& [key, v] : j.items()) {
    const char* k = key.c_str();
    if (key == "scheme") c.scheme = detail::get_as<std::string>(v, k);
    else if (key == "channel") c.channel = parse_channel(detail::get_as<std::string>(v, k));
    else if (key == "pe_sd") c.erasure.pe_sd = detail::get_real(v, k);
    else if (key == "pe_sr") c.erasure.pe_sr = detail::get_real(v, k);
    else if (key == "pe_rd") c.erasure.pe_rd = detail::get_real(v, k);
    else if (key == "pe_rr") c.erasure.pe_rr = detail::get_real(v, k);
    else if (key == "K") c.erasure.K = detail::get_count(v, k);
    else if (key == "relays") c.erasure.relays = detail::get_count(v, k);
    else if (key == "m") c.m = detail::get_count(v, k);
    else if (key == "mu") c.mu = detail::get_count(v, k);
    else if (key == "n") c.n = detail::get_count(v, k);
    else if (key == "d_sd") c.topology.d_sd = detail::get_real(v, k);
    else if (key == "d_sr") c.topology.d_sr = detail::get_real(v, k);
    else if (key == "d_rd") c.topology.d_rd = detail::get_real(v, k);
    else if (key == "d_rr") c.topology.d_rr = detail::get_real(v, k);
    else if (key == "path_loss_exponent") c.topology.path_loss_exponent = detail::get_real(v, k);
    else if (key == "snr_db") c.snr_db = detail::get_real(v, k);
    else if (key == "snr_db_grid") c.snr_grid = SnrGrid::parse(detail::get_as<std::string>(v, k));
    else if (key == "gamma_gap_db") c.gamma_gap_db = detail::get_real(v, k);
    else if (key == "alpha") {
      if (v.is_string()) {
        if (v.get<std::string>() != "auto") throw ConfigError("alpha must be \"auto\" or a number");
        c.alpha_policy = AlphaPolicy::automatic;
      } else {
        c.alpha_policy = AlphaPolicy::fixed;
        c.alpha = detail::get_real(v, k);
      }
    } else if (key == "fixed_gain") c.fixed_gain = detail::get_as<bool>(v, k);
    else if (key == "trials") c.trials = detail::get_count(v, k);
    else if (key == "seed") {
      if (v.is_null()) c.seed.reset();
      else c.seed = detail::get_count(v, k);
    } else if (key == "blocks") c.blocks = detail::get_count(v, k);
    else if (key == "burn_in") c.burn_in = detail::get_count(v, k);
    else if (key == "carryover") {
      if (v.is_null()) {
        c.carryover.reset();
      } else {
        if (!v.is_array() || v.size() != 3) throw ConfigError("carryover must be [n1, n2, n3] or null");
        c.carryover = CarryoverState{detail::get_count(v[0], k), detail::get_count(v[1], k),
                                     detail::get_count(v[2], k)};
      }
    } else if (key == "chain_blocks") c.chain_blocks = detail::get_count(v, k);
    else if (key == "tol") c.tol = detail::get_real(v, k);
    else if (key == "m_max") c.m_max = detail::get_count(v, k);
    else if (key == "verify_payloads") c.verify_payloads = detail::get_as<bool>(v, k);
    else if (key == "threads") c.threads = static_cast<unsigned>(detail::get_count(v, k));
    else if (key == "out") c.out = detail::get_as<std::string>(v, k);
    else if (key == "format") c.format = detail::get_as<std::string>(v, k);
    else throw ConfigError("unknown config key '" + key + "'");
  }
  return c;
}

inline ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j, std::move(base));
}

/// FNV-1a over the canonical config echo without the output-only fields.
inline std::string config_hash(const ExperimentConfig& c) {
  json j = to_json(c);
  j.erase("out");
  j.erase("format");
  j.erase("threads");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Result bundles

namespace detail {

inline json bundle_header(const ExperimentConfig& c, const char* command) {
  json b;
  b["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
  b["command"] = command;
  b["config"] = to_json(c);
  b["config_hash"] = config_hash(c);
  return b;
}

inline json pdf_json(const TransmissionPdf& pdf) {
  const PdfStats st = pdf_stats(pdf);
  return {{"pmf", pdf.values()},
          {"support_end", pdf.support_end()},
          {"tail_mass", pdf.tail_mass()},
          {"normalizer", pdf.normalizer()},
          {"mean", st.mean},
          {"variance", st.variance}};
}

inline json histogram_json(const Histogram& h) {
  json bins = json::array();
  for (const auto& [v, c] : h.bins()) bins.push_back({v, c});
  return bins;
}

/// Mean with its standard error: batch means over 20 batches for dependent
/// multi-block series, the i.i.d. formula otherwise.
inline BatchEstimate mean_estimate(const std::vector<double>& xs, bool dependent) {
  if (dependent && xs.size() >= 40) return batch_mean(xs);
  const Summary s = summarize(xs);
  return {s.mean, xs.size() > 1 ? std::sqrt(s.variance / static_cast<double>(xs.size())) : 0.0};
}

inline json samples_json(const std::vector<double>& xs, bool dependent) {
  Histogram h;
  for (double x : xs) h.add(static_cast<std::int64_t>(std::llround(x)));
  const Summary s = summarize(xs);
  const BatchEstimate m = mean_estimate(xs, dependent);
  return {{"samples", s.count}, {"mean", s.mean},   {"variance", s.variance}, {"min", s.min},
          {"max", s.max},       {"std_error", m.std_error}, {"histogram", histogram_json(h)}};
}

inline json buffers_json(const BufferCounts& b) {
  return {{"buffer1", b.buffer1}, {"buffer2", b.buffer2}, {"buffer3", b.buffer3}, {"discard", b.discard}};
}

/// Analytic pdf for a scheme over the erasure network, if one exists for the
/// configured run.
inline TransmissionPdf analytic_pdf(Scheme s, const ExperimentConfig& c, const ErasureNetworkParams& p,
                                    bool steady_state) {
  const TruncationPolicy pol = c.truncation();
  switch (s) {
    case Scheme::direct: return direct_pdf(p.K, p.pe_sd, pol);
    case Scheme::naive: return naive_pdf(p, pol);
    case Scheme::netcoded:
      if (c.carryover) return netcoded_pdf(p, *c.carryover, pol);
      if (!steady_state) return netcoded_pdf(p, CarryoverState{}, pol);
      return sample_netcoded_chain(p, c.chain_blocks, c.burn_in, *c.seed, pol).steady_state;
  }
  return {};
}

struct Series {
  std::vector<double> samples;
  std::vector<double> per_block_mean;
  BufferCounts d_buffers;
};

inline Series approach2_series(Scheme s, const ExperimentConfig& c, double snr_db) {
  Approach2Config a;
  a.wireless = c.wireless(snr_db);
  a.K = c.erasure.K;
  a.scheme = s;
  a.alpha_policy = c.alpha_policy;
  a.fixed_gain = c.fixed_gain;
  a.n_blocks = c.blocks;
  std::vector<std::vector<Approach2Block>> runs(c.trials);
  parallel_trials(c.trials, c.threads, [&](std::size_t t) {
    try {
      runs[t] = simulate_approach2(a, *c.seed + t);
    } catch (const RunawayError& e) {
      throw RunawayError(std::string(e.what()) + " in trial " + std::to_string(t), e.cap);
    }
  });
  Series out;
  out.per_block_mean.assign(c.blocks, 0.0);
  for (const auto& run : runs)
    for (std::size_t b = 0; b < run.size(); ++b) {
      out.per_block_mean[b] += static_cast<double>(run[b].slots) / static_cast<double>(c.trials);
      if (b >= c.effective_burn_in()) out.samples.push_back(static_cast<double>(run[b].slots));
    }
  return out;
}

inline Series packet_series(Scheme s, const ExperimentConfig& c, double snr_db) {
  const SimConfig sc = c.sim_config();
  BatchResult r = c.channel == ChannelMode::erasure
                      ? run_batch(s, sc, c.trials, *c.seed, c.threads)
                      : simulate_approach1(s, sc, c.wireless(snr_db), c.trials, *c.seed, c.threads);
  return Series{std::move(r.samples), std::move(r.per_block_mean), r.d_buffers};
}

inline Series run_series(Scheme s, const ExperimentConfig& c, double snr_db) {
  return c.channel == ChannelMode::wireless_approach2 ? approach2_series(s, c, snr_db)
                                                      : packet_series(s, c, snr_db);
}

}  // namespace detail

/// Analytic transmission-count distributions over the erasure network.
inline json cmd_analyze(const ExperimentConfig& c) {
  c.validate();
  if (c.channel != ChannelMode::erasure) throw ConfigError("analyze needs the erasure channel");
  json b = detail::bundle_header(c, "analyze");
  json results = json::object();
  for (Scheme s : c.schemes()) {
    json r;
    r["analytic"] = detail::pdf_json(detail::analytic_pdf(s, c, c.erasure, true));
    if (s == Scheme::netcoded)
      r["carryover"] = c.carryover ? "fixed" : "steady_state";
    results[to_string(s)] = r;
  }
  b["results"] = results;
  return b;
}

/// Monte Carlo runs of the selected schemes, with the analytic pdf and the
/// total-variation distance to it where one is available.
inline json cmd_simulate(const ExperimentConfig& c) {
  c.validate();
  json b = detail::bundle_header(c, "simulate");
  json results = json::object();
  const bool multi = c.blocks > 1;
  for (Scheme s : c.schemes()) {
    const detail::Series series = detail::run_series(s, c, c.snr_db);
    const bool dependent = multi && (s == Scheme::netcoded || c.channel == ChannelMode::wireless_approach2);
    json r;
    r["empirical"] = detail::samples_json(series.samples, dependent);
    if (multi) r["per_block_mean"] = series.per_block_mean;
    if (s == Scheme::netcoded && c.channel != ChannelMode::wireless_approach2)
      r["d_buffers"] = detail::buffers_json(series.d_buffers);

    std::optional<ErasureNetworkParams> p;
    if (c.channel == ChannelMode::erasure) p = c.erasure;
    if (c.channel == ChannelMode::wireless_approach1 && s == Scheme::direct)
      p = equivalent_erasure_network(c.wireless(c.snr_db), c.erasure.K, c.erasure.relays);
    if (p) {
      const TransmissionPdf pdf = detail::analytic_pdf(s, c, *p, multi);
      Histogram h;
      for (double x : series.samples) h.add(static_cast<std::int64_t>(std::llround(x)));
      r["analytic"] = detail::pdf_json(pdf);
      r["tv_distance"] = tv_distance(h, pdf);
    }
    results[to_string(s)] = r;
  }
  b["results"] = results;
  return b;
}

/// Mean transmissions per scheme at every point of the SNR grid.
inline json cmd_sweep_snr(const ExperimentConfig& c) {
  c.validate();
  if (c.channel == ChannelMode::erasure) throw ConfigError("sweep-snr needs a wireless channel");
  json b = detail::bundle_header(c, "sweep-snr");
  json rows = json::array();
  const bool multi = c.blocks > 1;
  for (double snr_db : c.snr_grid.points()) {
    json row;
    row["snr_db"] = snr_db;
    for (Scheme s : c.schemes()) {
      const detail::Series series = detail::run_series(s, c, snr_db);
      const bool dependent = multi && (s == Scheme::netcoded || c.channel == ChannelMode::wireless_approach2);
      const BatchEstimate m = detail::mean_estimate(series.samples, dependent);
      row[to_string(s)] = {{"mean", m.estimate}, {"std_error", m.std_error}, {"samples", series.samples.size()}};
    }
    rows.push_back(row);
  }
  b["rows"] = rows;
  return b;
}

// ---------------------------------------------------------------------------
// Rendering

namespace detail {
inline std::string csv_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}
}  // namespace detail

/// CSV projection of a bundle. analyze / simulate give M, analytic_p,
/// empirical_p (with a leading scheme column when several schemes are present);
/// sweep-snr gives one line per (SNR, scheme).
inline std::string to_csv(const json& bundle) {
  std::ostringstream os;
  if (bundle.at("command") == "sweep-snr") {
    os << "snr_db,scheme,mean,std_error,samples\n";
    for (const auto& row : bundle.at("rows"))
      for (const auto& [key, v] : row.items()) {
        if (key == "snr_db") continue;
        os << detail::csv_number(row.at("snr_db").get<double>()) << ',' << key << ','
           << detail::csv_number(v.at("mean").get<double>()) << ','
           << detail::csv_number(v.at("std_error").get<double>()) << ',' << v.at("samples").get<std::size_t>()
           << '\n';
      }
    return os.str();
  }
  const json& results = bundle.at("results");
  const bool several = results.size() > 1;
  os << (several ? "scheme," : "") << "M,analytic_p,empirical_p\n";
  for (const auto& [scheme, r] : results.items()) {
    std::vector<double> analytic;
    if (r.contains("analytic")) analytic = r.at("analytic").at("pmf").get<std::vector<double>>();
    std::map<std::int64_t, double> empirical;
    std::int64_t hi = static_cast<std::int64_t>(analytic.size()) - 1;
    if (r.contains("empirical")) {
      const auto& e = r.at("empirical");
      const double total = e.at("samples").get<double>();
      for (const auto& bin : e.at("histogram")) {
        const std::int64_t M = bin[0].get<std::int64_t>();
        empirical[M] = bin[1].get<double>() / total;
        hi = std::max(hi, M);
      }
    }
    for (std::int64_t M = 0; M <= hi; ++M) {
      if (several) os << scheme << ',';
      os << M << ',';
      if (static_cast<std::size_t>(M) < analytic.size()) os << detail::csv_number(analytic[static_cast<std::size_t>(M)]);
      os << ',';
      if (r.contains("empirical")) {
        auto it = empirical.find(M);
        os << detail::csv_number(it == empirical.end() ? 0.0 : it->second);
      }
      os << '\n';
    }
  }
  return os.str();
}

inline std::string render(const json& bundle, const std::string& format) {
  if (format == "csv") return to_csv(bundle);
  return bundle.dump(2) + "\n";
}

}  // namespace ncfountain
