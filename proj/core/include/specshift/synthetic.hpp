#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "specshift/data.hpp"
#include "specshift/linalg.hpp"

namespace specshift {

struct FrequencyComponent {
  std::size_t bin = 0;  // cycles per L samples
  double amplitude = 1.0;
};

/// One temporal condition: a fixed mixture of sinusoids.
struct SyntheticCondition {
  std::vector<FrequencyComponent> components;
};

/// Each sample is L + H rows of
///   sum_j a_j * sin(2 pi f_j (n + offset) / L + phi_j,c) + N(0, noise^2)
/// with phi drawn once per (condition, component, channel). `offset` is a
/// per-sample integer shift in [0, L) when `random_offset` is set, and each
/// amplitude is multiplied by U(1 - jitter, 1 + jitter) per sample.
struct SyntheticSpec {
  std::size_t lookback = 96;
  std::size_t horizon = 96;
  std::size_t channels = 1;
  std::vector<SyntheticCondition> conditions;
  std::size_t samples_per_condition = 50;
  double noise = 0.1;
  double amplitude_jitter = 0.0;
  bool random_offset = true;
  std::uint64_t seed = 0;
};

/// samples[condition][i] is an (L + H) x C matrix.
struct SyntheticData {
  std::vector<std::vector<Matrix>> samples;
};

SyntheticData generate_synthetic(const SyntheticSpec& spec);

/// Low-frequency training conditions followed by one high-frequency-shifted
/// test condition.
SyntheticSpec shift_benchmark_spec(std::uint64_t seed, std::size_t lookback = 64,
                                   std::size_t horizon = 32);

/// All conditions but the last form train/val (the last `val_fraction` of
/// each condition's samples go to val); the last condition is the test split.
/// Inputs are z-scored with train statistics.
WindowedDataset shift_benchmark_dataset(const SyntheticSpec& spec, double val_fraction = 0.2);

/// Concatenates every sample into one table with a leading sample-id column.
RawSeries synthetic_to_raw(const SyntheticSpec& spec, const SyntheticData& data);

}  // namespace specshift
