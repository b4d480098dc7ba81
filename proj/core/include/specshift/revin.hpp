#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "specshift/linalg.hpp"
#include "specshift/params.hpp"

namespace specshift {

inline constexpr double kRevinEpsilon = 1e-5;

/// Per-column mean and epsilon-guarded population std, saved by
/// revin_normalize for the matching denormalize call.
struct ColumnStats {
  Vector mean;
  Vector std;

  bool empty() const noexcept { return mean.size() == 0; }
};

ColumnStats column_stats(const MatrixRef& x, double epsilon = kRevinEpsilon);

/// Column-wise instance z-score. Columns are channels of one series, or the
/// samples of a single-channel batch. std = sqrt(var + epsilon).
Matrix revin_normalize(const MatrixRef& x, ColumnStats& saved);

/// y = gamma * (yhat * std + mean) + beta, column-wise.
Matrix revin_denormalize(const MatrixRef& yhat, const ColumnStats& saved,
                         const Vector& gamma, const Vector& beta);

/// Learnable per-channel affine.
struct RevinParams {
  Matrix gamma;  // C x 1, starts at 1
  Matrix beta;   // C x 1, starts at 0

  std::vector<ParamRef> params(std::string_view prefix = "revin.");
};

RevinParams init_revin(std::size_t channels);

}  // namespace specshift
