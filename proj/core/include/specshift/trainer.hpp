#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "specshift/data.hpp"
#include "specshift/pipeline.hpp"

namespace specshift {

struct TrainConfig {
  PipelineConfig pipeline;
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 30;
  std::size_t patience = 5;
  std::uint64_t seed = 0;
};

void validate(const TrainConfig& config);

/// Epoch 0 is the untrained pipeline.
struct EpochRecord {
  std::size_t epoch = 0;
  double train_mse = 0.0;
  double val_mse = 0.0;
  double lr = 0.0;
  std::size_t rejected_steps = 0;
};

struct TrainResult {
  Pipeline pipeline;
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  std::vector<std::string> notes;
};

/// Mini-batch Adam on the train split, validation every epoch, early stop on
/// `patience` epochs without strict improvement (counted from epoch 1), best
/// validation parameters restored. Scores are fit on the train split unless
/// supplied.
TrainResult train(const TrainConfig& config, const WindowedDataset& data,
                  const StabilityScores* scores = nullptr);

struct EvalOptions {
  double alpha = 1.0;
  std::optional<double> ema_decay;  // refresh scores per batch; 1 means no refresh
  std::size_t batch_size = 256;
};

struct Metrics {
  double mse = 0.0;
  double mae = 0.0;
  std::size_t windows = 0;
};

/// Windows are visited in index order, which matters for EMA refresh.
Metrics evaluate(const Pipeline& pipeline, const WindowedDataset& data, Split split,
                 const EvalOptions& options = {});

/// Worst |analytic - numeric| / max(|analytic|, |numeric|, 1e-2) over every
/// trainable parameter, using central differences of the training loss.
double finite_diff_check(Pipeline& pipeline, const Batch& sample, double step = 1e-5);

}  // namespace specshift
