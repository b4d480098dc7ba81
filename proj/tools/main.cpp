#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

struct Flags {
  std::string config;
  std::vector<std::string> set;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> data;
  std::optional<std::string> method;
  std::optional<std::string> backbone;
  std::optional<std::size_t> horizon;
  std::optional<std::size_t> lookback;
  std::string checkpoint;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "key=value config file");
  cmd->add_option("--seed", f.seed, "training seed");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--data", f.data, "CSV path or 'synthetic'");
  cmd->add_option("--method", f.method, "none, revin, san, fan, tifo or tifo+san");
  cmd->add_option("--backbone", f.backbone, "linear or dlinear");
  cmd->add_option("--horizon", f.horizon, "forecast horizon H");
  cmd->add_option("--lookback", f.lookback, "input length L");
  cmd->add_option("--set", f.set, "extra key=value override (repeatable)");
}

specshift::RunConfig resolve(const Flags& f) {
  using specshift::set_config_value;
  specshift::RunConfig cfg = f.config.empty() ? specshift::RunConfig{}
                                              : specshift::load_config(f.config);
  for (const auto& kv : f.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      specshift::fail(specshift::ErrorKind::invalid_argument,
                      "--set expects key=value, got '" + kv + "'");
    }
    set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (f.seed) cfg.seed = *f.seed;
  if (f.out) cfg.out = *f.out;
  if (f.data) cfg.data = *f.data;
  if (f.method) cfg.method = *f.method;
  if (f.backbone) cfg.backbone = *f.backbone;
  if (f.horizon) cfg.horizon = *f.horizon;
  if (f.lookback) cfg.lookback = *f.lookback;
  return cfg;
}

std::size_t thread_cap() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SPECSHIFT_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) n = static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      std::cerr << "specshift: ignoring SPECSHIFT_THREADS=" << env << "\n";
    }
  }
  return n;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frequency stability scoring, spectral re-weighting and shift diagnostics"};
  app.require_subcommand(1);
  Flags f;

  auto* stats = app.add_subcommand("stats", "fit stability scores on the train split");
  auto* train = app.add_subcommand("train", "train a pipeline and write a checkpoint");
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
  auto* shift = app.add_subcommand("shift", "train/test spectral shift report");
  auto* ablate = app.add_subcommand("ablate", "window/resolution/metric/alpha/ema ablation");
  auto* synth = app.add_subcommand("synth", "write the synthetic benchmark as CSV");
  for (auto* cmd : {stats, train, eval, shift, ablate, synth}) add_common(cmd, f);
  eval->add_option("--checkpoint", f.checkpoint, "checkpoint (default <out>/checkpoint.bin)");
  shift->add_option("--checkpoint", f.checkpoint, "checkpoint for the After columns");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  namespace cli = specshift::cli;
  try {
    const specshift::RunConfig cfg = resolve(f);
    if (stats->parsed()) {
      cli::cmd_stats(cfg, std::cerr);
    } else if (train->parsed()) {
      cli::cmd_train(cfg, std::cerr);
    } else if (eval->parsed()) {
      const std::filesystem::path ckpt =
          f.checkpoint.empty() ? std::filesystem::path(cfg.out) / "checkpoint.bin"
                               : std::filesystem::path(f.checkpoint);
      cli::cmd_eval(cfg, ckpt, std::cerr);
    } else if (shift->parsed()) {
      std::optional<std::filesystem::path> ckpt;
      if (!f.checkpoint.empty()) ckpt = f.checkpoint;
      cli::cmd_shift(cfg, ckpt, std::cerr);
    } else if (ablate->parsed()) {
      cli::cmd_ablate(cfg, thread_cap(), std::cerr);
    } else if (synth->parsed()) {
      cli::cmd_synth(cfg, std::cerr);
    }
  } catch (const specshift::Error& e) {
    std::cerr << "specshift: " << specshift::to_string(e.kind()) << ": " << e.what() << "\n";
    return cli::exit_code(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "specshift: data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "specshift: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
