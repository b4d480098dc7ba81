#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "specshift/linalg.hpp"
#include "specshift/params.hpp"

namespace specshift {

enum class BackboneKind { linear, dlinear };

BackboneKind parse_backbone(std::string_view name);
std::string to_string(BackboneKind kind);

inline constexpr std::size_t kDefaultDLinearKernel = 25;

struct BackboneConfig {
  BackboneKind kind = BackboneKind::linear;
  std::size_t lookback = 0;  // L
  std::size_t horizon = 0;   // H
  std::size_t channels = 0;  // C
  std::size_t kernel = kDefaultDLinearKernel;  // DLinear moving-average size
  bool shared = false;  // one head for all channels instead of one per channel
};

/// Linear: y = W x + b per channel. DLinear: y = W_t trend + W_s seasonal + b_t + b_s.
///
/// Head weights for all channels are stacked into a (heads * H) x L matrix;
/// channel c uses row block head(c).
struct BackboneParams {
  BackboneConfig config;
  Matrix weight;           // linear W, or the DLinear seasonal head
  Matrix bias;             // heads x H
  Matrix trend_weight;     // DLinear only
  Matrix trend_bias;       // DLinear only
  Matrix moving_average;   // L x L averaging operator (DLinear only, not a parameter)

  std::size_t heads() const noexcept { return config.shared ? 1 : config.channels; }
  std::size_t head(std::size_t channel) const noexcept {
    return config.shared ? 0 : channel;
  }

  std::vector<ParamRef> params(std::string_view prefix = "backbone.");
};

BackboneParams init_backbone(const BackboneConfig& config, std::uint64_t seed);

/// Centered moving average with edge replication; trend + seasonal == x.
std::pair<std::vector<double>, std::vector<double>> moving_average_decompose(
    const std::vector<double>& x, std::size_t kernel);

/// L x L matrix A with trend = A x.
Matrix moving_average_matrix(std::size_t length, std::size_t kernel);

/// Forecast for an L x C window; returns H x C.
Matrix backbone_forward(const BackboneParams& model, const MatrixRef& x);

/// Batched forward for one channel: columns of `x` (L x B) are samples.
Matrix backbone_forward_channel(const BackboneParams& model, std::size_t channel,
                                const MatrixRef& x);

/// Accumulates parameter gradients into `grad` and, when non-null, writes
/// d/dx (L x B) for the batched channel call.
void backbone_vjp_channel(const BackboneParams& model, std::size_t channel,
                          const MatrixRef& x, const MatrixRef& upstream,
                          BackboneParams& grad, Matrix* grad_x);

struct BackboneGrads {
  BackboneParams params;
  Matrix x;  // L x C
};

BackboneGrads backbone_vjp(const BackboneParams& model, const MatrixRef& x,
                           const MatrixRef& upstream);

/// Same structure as `model`, every tensor zero.
BackboneParams zeros_like(const BackboneParams& model);

}  // namespace specshift
