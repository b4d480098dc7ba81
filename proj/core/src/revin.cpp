#include "specshift/revin.hpp"

#include <string>

#include "specshift/error.hpp"

namespace specshift {

ColumnStats column_stats(const MatrixRef& x, double epsilon) {
  require(x.rows() >= 2, "instance normalization needs at least 2 time steps");
  ColumnStats s;
  s.mean = x.colwise().mean().transpose();
  const Matrix centered = x.rowwise() - s.mean.transpose();
  const Vector var = centered.array().square().colwise().mean().transpose();
  s.std = (var.array() + epsilon).sqrt().matrix();
  return s;
}

Matrix revin_normalize(const MatrixRef& x, ColumnStats& saved) {
  saved = column_stats(x);
  return ((x.rowwise() - saved.mean.transpose()).array().rowwise() /
          saved.std.transpose().array())
      .matrix();
}

Matrix revin_denormalize(const MatrixRef& yhat, const ColumnStats& saved,
                         const Vector& gamma, const Vector& beta) {
  require(!saved.empty(), "denormalize called without saved statistics");
  const Eigen::Index n = yhat.cols();
  require(saved.mean.size() == n && gamma.size() == n && beta.size() == n,
          "statistics do not match the number of columns");
  Matrix y = yhat;
  for (Eigen::Index j = 0; j < n; ++j) {
    y.col(j) = (gamma(j) * (yhat.col(j).array() * saved.std(j) + saved.mean(j)) + beta(j))
                   .matrix();
  }
  return y;
}

std::vector<ParamRef> RevinParams::params(std::string_view prefix) {
  const std::string p(prefix);
  const auto c = static_cast<std::size_t>(gamma.rows());
  return {{p + "gamma", {c}, &gamma}, {p + "beta", {c}, &beta}};
}

RevinParams init_revin(std::size_t channels) {
  require(channels >= 1, "channels must be >= 1");
  const auto c = static_cast<Eigen::Index>(channels);
  return {Matrix::Ones(c, 1), Matrix::Zero(c, 1)};
}

}  // namespace specshift
