#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "specshift/linalg.hpp"
#include "specshift/params.hpp"

namespace specshift {

class WindowedDataset;

inline constexpr std::size_t kDefaultSanPatch = 12;
inline constexpr std::size_t kSanHidden = 64;
inline constexpr double kSanEpsilon = 1e-5;

/// Two-layer network: out = w2 * relu(w1 * in + b1) + b2.
struct SanNet {
  Matrix w1;
  Matrix b1;
  Matrix w2;
  Matrix b2;
};

/// Patch-level statistics predictor. Columns of every batch are samples of a
/// single channel; the predictor is shared across channels.
///
/// The mean net sees input patch means relative to the window mean and
/// predicts output patch means relative to the same reference. The variance
/// net sees input patch variances and emits softplus-guarded variances.
struct SanState {
  std::size_t lookback = 0;
  std::size_t horizon = 0;
  std::size_t patch = kDefaultSanPatch;
  SanNet mean_net;
  SanNet var_net;
  bool frozen = false;
  std::vector<double> loss_history;  // entry 0 is the loss at initialization

  std::size_t input_patches() const noexcept { return lookback / patch; }
  std::size_t output_patches() const noexcept { return horizon / patch; }

  std::vector<ParamRef> params(std::string_view prefix = "san.");
};

/// Rejects a patch length that does not divide both L and H, suggesting the
/// closest one that does.
void check_san_patch(std::size_t lookback, std::size_t horizon, std::size_t patch);

SanState san_init(std::size_t lookback, std::size_t horizon, std::size_t patch,
                  std::uint64_t seed);

/// Per-patch mean and population variance of each column: (n/P) x B each.
struct PatchStats {
  Matrix mean;
  Matrix var;
};

PatchStats patch_stats(const MatrixRef& x, std::size_t patch);

/// Predicted output patch statistics, (H/P) x B each.
PatchStats san_predict(const SanState& state, const PatchStats& input);

struct SanTrainOptions {
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
};

/// Stage 1: fits the predictor on the train split with an equal-weight MSE
/// on patch means and variances. The returned state is not frozen.
SanState san_stage1_train(const WindowedDataset& data, std::size_t patch,
                          std::size_t epochs, const SanTrainOptions& options = {});

/// (x_p - mean_p) / sqrt(var_p + eps) per input patch. Requires a frozen state.
Matrix san_normalize(const MatrixRef& x, const SanState& state);

/// yhat_p * sqrt(var_p + eps) + mean_p with predicted output statistics.
Matrix san_denormalize(const MatrixRef& yhat, const PatchStats& predicted,
                       const SanState& state);

/// Per-entry output scale sqrt(var + eps) broadcast to H x B.
Matrix san_output_scale(const PatchStats& predicted, std::size_t patch);

}  // namespace specshift
