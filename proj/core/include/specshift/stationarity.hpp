#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "specshift/linalg.hpp"
#include "specshift/spectral.hpp"

namespace specshift {

/// Amplitudes A(i, k, c) of N windows, K bins, C channels.
class AmplitudePanel {
 public:
  AmplitudePanel() = default;
  AmplitudePanel(std::size_t samples, std::size_t bins, std::size_t channels);

  std::size_t samples() const noexcept { return samples_; }
  std::size_t bins() const noexcept { return bins_; }
  std::size_t channels() const noexcept { return channels_; }

  double& at(std::size_t i, std::size_t k, std::size_t c) {
    return values_[(i * bins_ + k) * channels_ + c];
  }
  double at(std::size_t i, std::size_t k, std::size_t c) const {
    return values_[(i * bins_ + k) * channels_ + c];
  }

  /// Amplitudes of one (k, c) cell across all samples.
  std::vector<double> column(std::size_t k, std::size_t c) const;

 private:
  std::size_t samples_ = 0;
  std::size_t bins_ = 0;
  std::size_t channels_ = 0;
  std::vector<double> values_;
};

/// Windowing and resolution applied before taking amplitudes.
struct SpectralOptions {
  WindowKind window = WindowKind::rectangular;
  std::size_t keep = 0;  // bins kept; 0 keeps the full spectrum
};

/// Window accessor: returns the L x C window with the given index.
using WindowSource = std::function<MatrixRef(std::size_t)>;

AmplitudePanel build_panel(std::size_t count, const WindowSource& window_at,
                           const SpectralOptions& options = {});

enum class ScoreMetric { mu_sigma, entropy, correlation };

ScoreMetric parse_metric(std::string_view name);
std::string to_string(ScoreMetric metric);

inline constexpr double kDefaultScoreEpsilon = 1e-5;

/// K x C per-frequency, per-channel stationarity scores fit on a panel.
struct StabilityScores {
  Matrix values;  // K x C, finite and >= 0
  ScoreMetric metric = ScoreMetric::mu_sigma;
  double epsilon = kDefaultScoreEpsilon;
  std::size_t sample_count = 0;

  std::size_t bins() const noexcept { return static_cast<std::size_t>(values.rows()); }
  std::size_t channels() const noexcept { return static_cast<std::size_t>(values.cols()); }
};

/// mean_i A / (std_i A + epsilon), population standard deviation.
StabilityScores stability_scores(const AmplitudePanel& panel,
                                 double epsilon = kDefaultScoreEpsilon);

/// Inverse-entropy score: (1 - mean entropy / log2 K) * mean mass(k) * K.
///
/// Each sample's amplitudes are normalized into a distribution over bins;
/// an all-zero sample counts as uniform.
StabilityScores entropy_scores(const AmplitudePanel& panel);

/// |Pearson r| between each cell's amplitudes and the per-sample target
/// means of the same channel (`target_means` is N x C). Zero variance on
/// either side scores 0.
StabilityScores correlation_scores(const AmplitudePanel& panel,
                                   const Matrix& target_means);

/// decay * S + (1 - decay) * refit(batch), refit with the same metric.
StabilityScores ema_refresh(const StabilityScores& scores,
                            const AmplitudePanel& batch_panel, double decay);

}  // namespace specshift
