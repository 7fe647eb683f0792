// Command-line driver: analyze, simulate, sweep-snr.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "ncfountain/ncfountain.hpp"

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kTruncation = 3 };

struct Overrides {
  std::string config_path;
  std::optional<std::string> scheme;
  std::optional<std::string> channel;
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<std::string> snr_grid;
  std::optional<double> snr_db;
  std::optional<std::string> alpha;
  std::optional<std::size_t> blocks;
  std::optional<unsigned> threads;
  bool verify = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--scheme", o.scheme, "direct, naive, netcoded or all");
  cmd->add_option("--channel", o.channel, "erasure, wireless_approach1 or wireless_approach2");
  cmd->add_option("--trials", o.trials, "independent trials");
  cmd->add_option("--seed", o.seed, "base seed; trial t uses seed + t");
  cmd->add_option("--out", o.out, "output file (default: stdout)");
  cmd->add_option("--format", o.format, "json or csv");
  cmd->add_option("--snr-db-grid", o.snr_grid, "SNR grid in dB as start:stop:step");
  cmd->add_option("--snr-db", o.snr_db, "SNR in dB for single-point wireless runs");
  cmd->add_option("--alpha", o.alpha, "auto, fixed (use the config value) or a weight in [0, 1]");
  cmd->add_option("--blocks", o.blocks, "consecutive blocks per trial");
  cmd->add_option("--threads", o.threads, "worker threads");
  cmd->add_flag("--verify-payloads", o.verify, "carry real payloads and check every decode");
}

ncfountain::ExperimentConfig build_config(const Overrides& o) {
  using namespace ncfountain;
  ExperimentConfig c;
  if (!o.config_path.empty()) c = load_config(o.config_path);
  if (o.scheme) c.scheme = *o.scheme;
  if (o.channel) c.channel = parse_channel(*o.channel);
  if (o.trials) c.trials = *o.trials;
  if (o.seed) c.seed = *o.seed;
  if (o.out) c.out = *o.out;
  if (o.format) c.format = *o.format;
  if (o.snr_grid) c.snr_grid = SnrGrid::parse(*o.snr_grid);
  if (o.snr_db) c.snr_db = *o.snr_db;
  if (o.alpha) {
    if (*o.alpha == "auto") {
      c.alpha_policy = AlphaPolicy::automatic;
    } else if (*o.alpha == "fixed") {
      c.alpha_policy = AlphaPolicy::fixed;
    } else {
      try {
        std::size_t used = 0;
        c.alpha = std::stod(*o.alpha, &used);
        if (used != o.alpha->size()) throw std::invalid_argument("trailing text");
      } catch (const std::exception&) {
        throw ConfigError("--alpha must be auto, fixed or a number");
      }
      c.alpha_policy = AlphaPolicy::fixed;
    }
  }
  if (o.blocks) c.blocks = *o.blocks;
  if (o.threads) c.threads = *o.threads;
  if (o.verify) c.verify_payloads = true;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fountain-coded cooperative relaying: analysis and simulation"};
  app.require_subcommand(1);
  Overrides o;
  CLI::App* analyze = app.add_subcommand("analyze", "analytic transmission-count distributions");
  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo protocol simulation");
  CLI::App* sweep = app.add_subcommand("sweep-snr", "mean transmissions over an SNR grid");
  for (CLI::App* cmd : {analyze, simulate, sweep}) add_common(cmd, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    const ncfountain::ExperimentConfig cfg = build_config(o);
    cfg.validate();
    ncfountain::json bundle;
    if (analyze->parsed()) bundle = ncfountain::cmd_analyze(cfg);
    else if (simulate->parsed()) bundle = ncfountain::cmd_simulate(cfg);
    else bundle = ncfountain::cmd_sweep_snr(cfg);

    const std::string text = ncfountain::render(bundle, cfg.format);
    if (cfg.out.empty()) {
      std::cout << text;
    } else {
      std::ofstream f(cfg.out, std::ios::binary);
      if (!f) throw ncfountain::ConfigError("cannot write '" + cfg.out + "'");
      f << text;
    }
    return kOk;
  } catch (const ncfountain::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const ncfountain::DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const ncfountain::TruncationError& e) {
    std::cerr << "truncation error: " << e.what() << '\n';
    return kTruncation;
  } catch (const ncfountain::RunawayError& e) {
    std::cerr << "runaway error: " << e.what() << '\n';
    return kTruncation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
}
