#include "specshift/losses.hpp"

#include "specshift/error.hpp"

namespace specshift {

namespace {

void check_shapes(const MatrixRef& a, const MatrixRef& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(),
          "prediction " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
              " does not match target " + std::to_string(b.rows()) + "x" +
              std::to_string(b.cols()));
  require(a.size() > 0, "empty prediction");
}

}  // namespace

double mse(const MatrixRef& yhat, const MatrixRef& y) {
  check_shapes(yhat, y);
  return (yhat - y).squaredNorm() / static_cast<double>(y.size());
}

double mae(const MatrixRef& yhat, const MatrixRef& y) {
  check_shapes(yhat, y);
  return (yhat - y).cwiseAbs().sum() / static_cast<double>(y.size());
}

Matrix mse_grad(const MatrixRef& yhat, const MatrixRef& y, double count) {
  check_shapes(yhat, y);
  return (2.0 / count) * (yhat - y);
}

}  // namespace specshift
