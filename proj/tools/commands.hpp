#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>

#include "specshift/checkpoint.hpp"
#include "specshift/data.hpp"
#include "specshift/error.hpp"
#include "specshift/pipeline.hpp"
#include "specshift/run_config.hpp"

namespace specshift::cli {

/// Exit status for each failure category; 0 is success.
int exit_code(ErrorKind kind) noexcept;

Checkpoint make_checkpoint(const RunConfig& cfg, Pipeline& pipeline, std::size_t best_epoch);

/// Rebuilds a trained pipeline for `cfg` and the dataset's shapes from a
/// checkpoint. Method and shape mismatches raise checkpoint errors.
Pipeline pipeline_from_checkpoint(const Checkpoint& ckpt, const RunConfig& cfg,
                                  const WindowedDataset& data);

/// Every command validates `cfg`, creates `cfg.out`, and writes config.txt
/// next to its artifacts.

/// scores.bin and stats.csv (channel, freq, mean, std, score).
void cmd_stats(const RunConfig& cfg, std::ostream& log);

/// checkpoint.bin and history.csv. Reuses <out>/scores.bin when present.
void cmd_train(const RunConfig& cfg, std::ostream& log);

/// metrics.json: one record per (alpha, ema decay) setting on the test split.
void cmd_eval(const RunConfig& cfg, const std::filesystem::path& checkpoint, std::ostream& log);

/// shift.csv and shift_summary.json. "After" columns need a checkpoint whose
/// method transforms the input.
void cmd_shift(const RunConfig& cfg, const std::optional<std::filesystem::path>& checkpoint,
               std::ostream& log);

/// ablation.csv: one row per cell, metrics as mean and std over `repeats`.
/// At most `threads` training runs execute at once.
void cmd_ablate(const RunConfig& cfg, std::size_t threads, std::ostream& log);

/// synthetic.csv with the configured synthetic benchmark.
void cmd_synth(const RunConfig& cfg, std::ostream& log);

}  // namespace specshift::cli
