#pragma once

#include "specshift/linalg.hpp"

namespace specshift {

/// Mean of squared element-wise differences.
double mse(const MatrixRef& yhat, const MatrixRef& y);

/// Mean absolute difference.
double mae(const MatrixRef& yhat, const MatrixRef& y);

/// d mse / d yhat, scaled as if the mean ran over `count` elements.
Matrix mse_grad(const MatrixRef& yhat, const MatrixRef& y, double count);

}  // namespace specshift
