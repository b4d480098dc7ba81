#include "specshift/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "specshift/error.hpp"
#include "specshift/params.hpp"
#include "specshift/spectral.hpp"

namespace specshift {

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  require(spec.lookback >= 2, "lookback must be >= 2");
  require(spec.channels >= 1, "channels must be >= 1");
  require(!spec.conditions.empty(), "at least one condition is required");
  require(spec.samples_per_condition >= 1, "samples per condition must be >= 1");
  require(spec.noise >= 0.0 && spec.amplitude_jitter >= 0.0 && spec.amplitude_jitter < 1.0,
          "noise must be >= 0 and jitter in [0, 1)");
  const std::size_t bins = bin_count(spec.lookback);
  for (std::size_t ci = 0; ci < spec.conditions.size(); ++ci) {
    for (const auto& comp : spec.conditions[ci].components) {
      require(comp.bin < bins, "condition " + std::to_string(ci) + ": frequency index " +
                                   std::to_string(comp.bin) + " must be < K = " +
                                   std::to_string(bins));
    }
  }

  const double two_pi = 2.0 * std::numbers::pi;
  const auto rows = static_cast<Eigen::Index>(spec.lookback + spec.horizon);
  const auto cols = static_cast<Eigen::Index>(spec.channels);
  const auto len = static_cast<double>(spec.lookback);
  std::uniform_real_distribution<double> phase_dist(0.0, two_pi);
  std::uniform_real_distribution<double> jitter_dist(1.0 - spec.amplitude_jitter,
                                                     1.0 + spec.amplitude_jitter);
  std::uniform_int_distribution<std::size_t> offset_dist(0, spec.lookback - 1);
  std::normal_distribution<double> noise_dist(0.0, 1.0);

  SyntheticData out;
  for (std::size_t ci = 0; ci < spec.conditions.size(); ++ci) {
    const auto& comps = spec.conditions[ci].components;
    auto phase_rng = make_rng(spec.seed, "synthetic.phase." + std::to_string(ci));
    Matrix phase(static_cast<Eigen::Index>(comps.size()), cols);
    for (Eigen::Index j = 0; j < phase.rows(); ++j) {
      for (Eigen::Index c = 0; c < cols; ++c) phase(j, c) = phase_dist(phase_rng);
    }
    auto rng = make_rng(spec.seed, "synthetic.samples." + std::to_string(ci));
    std::vector<Matrix> samples;
    samples.reserve(spec.samples_per_condition);
    for (std::size_t s = 0; s < spec.samples_per_condition; ++s) {
      const double offset = spec.random_offset ? static_cast<double>(offset_dist(rng)) : 0.0;
      Matrix x = Matrix::Zero(rows, cols);
      for (std::size_t j = 0; j < comps.size(); ++j) {
        const double amp =
            comps[j].amplitude * (spec.amplitude_jitter > 0.0 ? jitter_dist(rng) : 1.0);
        const double omega = two_pi * static_cast<double>(comps[j].bin) / len;
        for (Eigen::Index c = 0; c < cols; ++c) {
          const double phi = phase(static_cast<Eigen::Index>(j), c);
          for (Eigen::Index n = 0; n < rows; ++n) {
            x(n, c) += amp * std::sin(omega * (static_cast<double>(n) + offset) + phi);
          }
        }
      }
      if (spec.noise > 0.0) {
        for (Eigen::Index c = 0; c < cols; ++c) {
          for (Eigen::Index n = 0; n < rows; ++n) x(n, c) += spec.noise * noise_dist(rng);
        }
      }
      samples.push_back(std::move(x));
    }
    out.samples.push_back(std::move(samples));
  }
  return out;
}

SyntheticSpec shift_benchmark_spec(std::uint64_t seed, std::size_t lookback,
                                   std::size_t horizon) {
  SyntheticSpec spec;
  spec.lookback = lookback;
  spec.horizon = horizon;
  require(lookback >= 8, "shift benchmark needs lookback >= 8");
  spec.channels = 7;
  spec.samples_per_condition = 100;
  spec.noise = 1.2;
  spec.amplitude_jitter = 0.1;
  spec.seed = seed;
  // Train conditions share a low-frequency core and differ in one weak low
  // component; the test condition adds broadband energy over the upper half
  // of the lookback spectrum.
  const std::vector<FrequencyComponent> core{{1, 1.0}, {2, 0.6}, {3, 0.4}};
  auto with = [&](std::vector<FrequencyComponent> extra) {
    SyntheticCondition c{core};
    c.components.insert(c.components.end(), extra.begin(), extra.end());
    return c;
  };
  spec.conditions = {with({{4, 0.2}}), with({{5, 0.2}}), with({{6, 0.2}}),
                     with({{4, 0.1}})};
  std::vector<FrequencyComponent> broadband;
  for (std::size_t k = lookback / 4; k < lookback / 2; ++k) broadband.push_back({k, 1.5});
  spec.conditions.push_back(with(std::move(broadband)));
  return spec;
}

WindowedDataset shift_benchmark_dataset(const SyntheticSpec& spec, double val_fraction) {
  require(spec.conditions.size() >= 2, "need at least one train and one test condition");
  require(val_fraction >= 0.0 && val_fraction < 1.0, "val fraction must be in [0, 1)");
  const SyntheticData data = generate_synthetic(spec);
  const std::size_t n = spec.samples_per_condition;
  const auto n_val = static_cast<std::size_t>(std::floor(val_fraction * static_cast<double>(n)));
  std::vector<Matrix> train, val, test;
  for (std::size_t ci = 0; ci + 1 < data.samples.size(); ++ci) {
    for (std::size_t s = 0; s < n; ++s) {
      (s < n - n_val ? train : val).push_back(data.samples[ci][s]);
    }
  }
  test = data.samples.back();
  const std::size_t n_train = train.size();
  const std::size_t n_val_total = val.size();
  std::vector<Matrix> all = std::move(train);
  all.insert(all.end(), val.begin(), val.end());
  all.insert(all.end(), test.begin(), test.end());
  return zscore_fit_apply(WindowedDataset::from_samples(std::move(all), spec.lookback,
                                                        spec.horizon, n_train, n_val_total));
}

RawSeries synthetic_to_raw(const SyntheticSpec& spec, const SyntheticData& data) {
  RawSeries raw;
  raw.timestamp_name = "sample";
  for (std::size_t c = 0; c < spec.channels; ++c) raw.channel_names.push_back("ch" + std::to_string(c));
  Eigen::Index total = 0;
  for (const auto& cond : data.samples) {
    for (const auto& s : cond) total += s.rows();
  }
  raw.values.resize(total, static_cast<Eigen::Index>(spec.channels));
  Eigen::Index row = 0;
  for (std::size_t ci = 0; ci < data.samples.size(); ++ci) {
    for (std::size_t si = 0; si < data.samples[ci].size(); ++si) {
      const Matrix& s = data.samples[ci][si];
      raw.values.middleRows(row, s.rows()) = s;
      for (Eigen::Index n = 0; n < s.rows(); ++n) {
        raw.timestamps.push_back("c" + std::to_string(ci) + "s" + std::to_string(si) + "t" +
                                 std::to_string(n));
      }
      row += s.rows();
    }
  }
  return raw;
}

}  // namespace specshift
