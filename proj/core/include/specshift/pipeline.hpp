#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "specshift/data.hpp"
#include "specshift/fan.hpp"
#include "specshift/linalg.hpp"
#include "specshift/models.hpp"
#include "specshift/params.hpp"
#include "specshift/revin.hpp"
#include "specshift/san.hpp"
#include "specshift/stationarity.hpp"
#include "specshift/tifo.hpp"

namespace specshift {

enum class Method { none, revin, san, fan, tifo, tifo_san };

Method parse_method(std::string_view name);
std::string to_string(Method method);

bool uses_tifo(Method m) noexcept;
bool uses_san(Method m) noexcept;

struct PipelineConfig {
  Method method = Method::none;
  BackboneConfig backbone;
  // Frequency operator.
  std::size_t tifo_hidden = kDefaultTifoHidden;
  TifoInitOptions tifo_init;
  ScoreMetric metric = ScoreMetric::mu_sigma;
  double score_epsilon = kDefaultScoreEpsilon;
  SpectralOptions spectral;
  // Baselines.
  std::size_t san_patch = kDefaultSanPatch;
  std::size_t san_epochs = 10;
  std::size_t fan_k = kDefaultFanTopK;
  std::uint64_t seed = 0;
};

/// One mini-batch, split by channel: x[c] is L x B, y[c] is H x B.
struct Batch {
  std::vector<Matrix> x;
  std::vector<Matrix> y;

  std::size_t size() const noexcept { return x.empty() ? 0 : static_cast<std::size_t>(x[0].cols()); }
};

Batch make_batch(const WindowedDataset& data, const std::vector<std::size_t>& indices);

/// Normalizer / frequency operator / backbone composition for one method.
///
/// Per channel the forward pass is
///   [SAN normalize] -> [RevIN normalize] -> [frequency operator] ->
///   backbone (FAN: on the residual, plus the main-frequency network) ->
///   [RevIN denormalize] -> [SAN denormalize].
/// The SAN predictor is fit in a separate first stage and stays frozen.
class Pipeline {
 public:
  PipelineConfig config;
  BackboneParams backbone;
  RevinParams revin;
  SanState san;
  FanParams fan;
  TifoParams tifo;
  StabilityScores scores;
  bool has_scores = false;
  bool trained = false;

  /// Tensors updated by the optimizer, in a fixed order.
  std::vector<ParamRef> trainable();
  /// Every tensor saved in a checkpoint (trainable, frozen, and scores).
  std::vector<ParamRef> tensors();

  /// Same structure, every trainable tensor zero.
  Pipeline zeros_like() const;

  /// Training loss of the batch and, when `grad` is non-null, its gradient
  /// accumulated into grad->trainable(). The loss is the forecast MSE; for
  /// FAN it is the sum of the MSEs of the two decomposed forecasts.
  double loss_and_grad(const Batch& batch, Pipeline* grad) const;

  /// Forecasts per channel (H x B) with explicitly supplied operator weights.
  std::vector<Matrix> predict(const Batch& batch, const FrequencyWeights* weights) const;
  std::vector<Matrix> predict(const Batch& batch) const;

  /// The input as the backbone sees it, per channel (L x B). Identity for
  /// method=none.
  std::vector<Matrix> input_transform(const Batch& batch,
                                      const FrequencyWeights* weights = nullptr) const;

  /// Representation the stability scores are computed on: the raw input, or
  /// the SAN-normalized input when SAN precedes the operator.
  std::vector<Matrix> score_view(const Batch& batch) const;

  /// Amplitudes of the re-weighted spectrum the operator feeds the backbone,
  /// taken in the frequency domain so switched-off bins are exactly zero.
  AmplitudePanel operator_panel(const Batch& batch, const FrequencyWeights* weights = nullptr) const;

  FrequencyWeights current_weights() const;
};

/// Allocates and initializes every component for the given shapes without
/// fitting anything; the SAN predictor is left at initialization.
Pipeline make_pipeline_shell(const PipelineConfig& config, std::size_t lookback,
                             std::size_t horizon, std::size_t channels);

/// make_pipeline_shell plus SAN stage 1 on the train split.
Pipeline make_pipeline(const PipelineConfig& config, const WindowedDataset& data);

/// Amplitude panel of the given windows in the score representation.
AmplitudePanel score_panel(const Pipeline& pipeline, const WindowedDataset& data,
                           const std::vector<std::size_t>& indices);

/// Fits stability scores on the train split.
StabilityScores fit_scores(const Pipeline& pipeline, const WindowedDataset& data);

/// Panel built from per-channel L x B matrices.
AmplitudePanel panel_from_channels(const std::vector<Matrix>& channels,
                                   const SpectralOptions& options);

}  // namespace specshift
