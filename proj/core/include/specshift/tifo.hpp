#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "specshift/linalg.hpp"
#include "specshift/params.hpp"
#include "specshift/spectral.hpp"
#include "specshift/stationarity.hpp"

namespace specshift {

/// How raw stability scores are conditioned before entering the networks.
enum class ScoreInput {
  raw,    // S as computed
  log1p,  // log(1 + S); keeps zero-dispersion bins (S ~ 1/epsilon) in range
};

/// Output nonlinearity of the weight generators.
enum class WeightActivation {
  linear,
  relu,  // non-negative weights; bins can be switched off exactly
};

ScoreInput parse_score_input(std::string_view name);
std::string to_string(ScoreInput v);
WeightActivation parse_weight_activation(std::string_view name);
std::string to_string(WeightActivation v);

/// K -> hidden -> K network with a ReLU hidden layer.
struct WeightMlp {
  Matrix w1;  // hidden x K
  Matrix b1;  // hidden x 1
  Matrix w2;  // K x hidden
  Matrix b2;  // K x 1
};

/// The two weight generators of the frequency operator. Parameters are shared
/// across channels: each channel's K-vector of scores is a separate input.
struct TifoParams {
  std::size_t bins = 0;
  std::size_t channels = 0;
  std::size_t hidden = 0;
  std::uint64_t seed = 0;
  ScoreInput input = ScoreInput::log1p;
  WeightActivation activation = WeightActivation::relu;
  WeightMlp real;
  WeightMlp imag;

  /// Tensors as mlp_r.w1, mlp_r.b1, ..., mlp_i.b2.
  std::vector<ParamRef> params(std::string_view prefix = "");
};

struct TifoInitOptions {
  ScoreInput input = ScoreInput::log1p;
  WeightActivation activation = WeightActivation::relu;
};

inline constexpr std::size_t kDefaultTifoHidden = 128;

/// First layers draw from U(-a, a), a = sqrt(6 / (fan_in + fan_out)); the
/// output layer starts at weight 0 and bias 1, so the initial operator is
/// exactly the identity.
TifoParams init_tifo(std::size_t bins, std::size_t channels, std::size_t hidden,
                     std::uint64_t seed, const TifoInitOptions& options = {});

/// Per-frequency, per-channel weights for the real and imaginary planes.
struct FrequencyWeights {
  Matrix real;  // K x C
  Matrix imag;  // K x C
};

FrequencyWeights weights(const TifoParams& params, const StabilityScores& scores);

/// Accumulates d(loss)/d(params) into `grad` given d(loss)/d(lambda).
void weights_vjp(const TifoParams& params, const StabilityScores& scores,
                 const FrequencyWeights& upstream, TifoParams& grad);

/// (1 - alpha) + alpha * lambda on both planes.
FrequencyWeights alpha_scale(const FrequencyWeights& w, double alpha);

/// Per-channel spectral re-weighting of one series of fixed length:
/// y = iDFT(mask * (lambda_r * Re X + i lambda_i * Im X)), X = DFT(taps * x).
/// The operator is self-adjoint up to the window taps, which the VJP uses.
class SpectralReweighter {
 public:
  SpectralReweighter(std::size_t length, const SpectralOptions& options = {});

  std::size_t length() const noexcept { return dft_.length(); }
  std::size_t bins() const noexcept { return dft_.bins(); }
  std::size_t keep() const noexcept { return keep_; }

  /// Applies the weights. When `re`/`im` are non-empty they receive the
  /// masked spectrum of the windowed input, needed later by vjp().
  void apply(std::span<const double> x, std::span<const double> lambda_r,
             std::span<const double> lambda_i, std::span<double> y,
             std::span<double> re = {}, std::span<double> im = {}) const;

  /// Given the upstream gradient, adds d/d(lambda) into grad_r / grad_i and,
  /// when `grad_x` is non-empty, writes d/dx.
  void vjp(std::span<const double> upstream, std::span<const double> re,
           std::span<const double> im, std::span<const double> lambda_r,
           std::span<const double> lambda_i, std::span<double> grad_r,
           std::span<double> grad_i, std::span<double> grad_x = {}) const;

 private:
  RealDft dft_;
  std::size_t keep_;
  std::vector<double> taps_;
  bool windowed_;
  std::vector<double> bin_weight_;  // (1 or 2) / L
};

/// Multi-channel transform of an L x C window.
Matrix transform(const MatrixRef& x, const FrequencyWeights& w,
                 const SpectralOptions& options = {});

struct TransformGrads {
  Matrix x;         // L x C
  Matrix lambda_r;  // K x C
  Matrix lambda_i;  // K x C
};

TransformGrads transform_vjp(const MatrixRef& x, const FrequencyWeights& w,
                             const MatrixRef& upstream,
                             const SpectralOptions& options = {});

}  // namespace specshift
