#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "specshift/data.hpp"
#include "specshift/trainer.hpp"

namespace specshift {

/// Everything a command needs, as flat key=value text.
struct RunConfig {
  std::string data = "synthetic";  // CSV path, or "synthetic" for the shift benchmark
  std::uint64_t data_seed = 0;
  std::size_t lookback = 96;
  std::size_t horizon = 96;
  std::vector<double> split = {0.7, 0.2, 0.1};
  std::string method = "tifo";
  std::string backbone = "linear";
  std::size_t kernel = kDefaultDLinearKernel;
  bool shared = false;
  double lr = 1e-3;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 30;
  std::size_t patience = 5;
  std::uint64_t seed = 0;
  std::string metric = "mu_sigma";
  double score_epsilon = kDefaultScoreEpsilon;
  std::string window = "rect";
  std::size_t resolution = 0;  // DFT resolution in points; 0 keeps every bin
  std::size_t tifo_hidden = kDefaultTifoHidden;
  std::string score_input = "log1p";
  std::string weight_activation = "relu";
  std::size_t san_patch = kDefaultSanPatch;
  std::size_t san_epochs = 10;
  std::size_t fan_k = kDefaultFanTopK;
  double alpha = 1.0;
  std::vector<double> alphas;       // eval sweep; empty evaluates `alpha` only
  std::vector<double> ema_decays;   // eval sweep; 1 disables refresh
  std::size_t hist_bins = 50;
  std::size_t repeats = 1;
  std::vector<std::string> ablate_windows = {"rect"};
  std::vector<std::size_t> ablate_resolutions = {0};
  std::vector<std::string> ablate_metrics = {"mu_sigma"};
  std::vector<double> ablate_alphas = {1.0};
  std::vector<double> ablate_emas = {1.0};
  std::string out = "out";

  bool operator==(const RunConfig&) const = default;
};

/// Shortest text that parses back to the same double.
std::string format_double(double v);
/// Six significant digits, for reports.
std::string format_report(double v);

RunConfig parse_config(const std::string& text, const std::string& origin = "<memory>");
RunConfig load_config(const std::filesystem::path& path);

/// Sets one key from text; unknown keys and malformed values are rejected.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

std::vector<std::pair<std::string, std::string>> config_pairs(const RunConfig& cfg);
std::string to_text(const RunConfig& cfg);

/// Checks every value and cross-field constraint.
void validate(const RunConfig& cfg);

TrainConfig to_train_config(const RunConfig& cfg);

/// Loads, windows, splits and z-scores the configured data.
WindowedDataset load_dataset(const RunConfig& cfg);

}  // namespace specshift
