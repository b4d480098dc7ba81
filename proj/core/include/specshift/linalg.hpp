#pragma once

#include <Eigen/Dense>

namespace specshift {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using MatrixRef = Eigen::Ref<const Matrix>;

}  // namespace specshift
