#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "specshift/linalg.hpp"
#include "specshift/models.hpp"
#include "specshift/params.hpp"

namespace specshift {

inline constexpr std::size_t kDefaultFanTopK = 4;
inline constexpr std::size_t kFanHidden1 = 64;
inline constexpr std::size_t kFanHidden2 = 128;

struct FanSplit {
  Matrix residual;
  Matrix filtered;
};

/// Column-wise top-k dominant-frequency split: `filtered` keeps the k bins
/// of largest amplitude (ties go to the lower index), residual = x - filtered.
FanSplit fan_main_freq_part(const MatrixRef& x, std::size_t k);

/// Indices of the k largest entries, ties broken toward the lower index,
/// returned in ascending index order.
std::vector<std::size_t> top_k_indices(const std::vector<double>& values, std::size_t k);

/// Main-frequency predictor plus per-channel combination weights.
///
/// h1 = relu(w1 f + b1), h2 = relu(w2 [h1; x] + b2), main = w3 h2 + b3.
/// Forecast = combine(0, c) * backbone(residual) + combine(1, c) * main.
struct FanParams {
  std::size_t lookback = 0;
  std::size_t horizon = 0;
  std::size_t channels = 0;
  std::size_t k = kDefaultFanTopK;
  Matrix w1;  // 64 x L
  Matrix b1;
  Matrix w2;  // 128 x (64 + L)
  Matrix b2;
  Matrix w3;  // H x 128
  Matrix b3;
  Matrix combine;  // 2 x C, starts at 1

  std::vector<ParamRef> params(std::string_view prefix = "fan.");
};

FanParams init_fan(std::size_t lookback, std::size_t horizon, std::size_t channels,
                   std::size_t k, std::uint64_t seed);

FanParams zeros_like(const FanParams& p);

struct FanCache {
  Matrix pre1, h1, pre2, h2;
};

/// Main-frequency forecast for a batch (columns are samples): H x B.
Matrix fan_mlp_forward(const FanParams& p, const MatrixRef& filtered, const MatrixRef& x,
                       FanCache& cache);

/// Accumulates parameter gradients of the MLP (not `combine`).
void fan_mlp_vjp(const FanParams& p, const MatrixRef& filtered, const MatrixRef& x,
                 const FanCache& cache, const MatrixRef& upstream, FanParams& grad);

/// Forecast for an L x C window: H x C.
Matrix fan_forward(const MatrixRef& x, const FanParams& fan, const BackboneParams& backbone);

}  // namespace specshift
