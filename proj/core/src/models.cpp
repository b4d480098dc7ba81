#include "specshift/models.hpp"

#include <algorithm>
#include <cmath>

#include "specshift/error.hpp"

namespace specshift {

BackboneKind parse_backbone(std::string_view name) {
  if (name == "linear") return BackboneKind::linear;
  if (name == "dlinear") return BackboneKind::dlinear;
  fail(ErrorKind::invalid_argument,
       "unknown backbone '" + std::string(name) + "' (expected linear or dlinear)");
}

std::string to_string(BackboneKind kind) {
  return kind == BackboneKind::dlinear ? "dlinear" : "linear";
}

std::vector<ParamRef> BackboneParams::params(std::string_view prefix) {
  const std::string p(prefix);
  const std::size_t n = heads();
  const std::size_t h = config.horizon;
  const std::size_t l = config.lookback;
  if (config.kind == BackboneKind::linear) {
    return {{p + "w", {n, h, l}, &weight}, {p + "b", {n, h}, &bias}};
  }
  return {{p + "seasonal.w", {n, h, l}, &weight},
          {p + "seasonal.b", {n, h}, &bias},
          {p + "trend.w", {n, h, l}, &trend_weight},
          {p + "trend.b", {n, h}, &trend_bias}};
}

Matrix moving_average_matrix(std::size_t length, std::size_t kernel) {
  require(kernel % 2 == 1, "moving-average kernel must be odd, got " +
                               std::to_string(kernel));
  require(kernel >= 1 && kernel <= length,
          "moving-average kernel " + std::to_string(kernel) +
              " exceeds series length " + std::to_string(length));
  const auto n = static_cast<Eigen::Index>(length);
  const auto half = static_cast<Eigen::Index>(kernel / 2);
  const double w = 1.0 / static_cast<double>(kernel);
  Matrix a = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = -half; j <= half; ++j) {
      a(i, std::clamp<Eigen::Index>(i + j, 0, n - 1)) += w;
    }
  }
  return a;
}

std::pair<std::vector<double>, std::vector<double>> moving_average_decompose(
    const std::vector<double>& x, std::size_t kernel) {
  require(kernel % 2 == 1, "moving-average kernel must be odd, got " +
                               std::to_string(kernel));
  require(kernel >= 1 && kernel <= x.size(), "moving-average kernel exceeds length");
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const auto half = static_cast<std::ptrdiff_t>(kernel / 2);
  std::vector<double> trend(x.size()), seasonal(x.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::ptrdiff_t j = -half; j <= half; ++j) {
      sum += x[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i + j, 0, n - 1))];
    }
    const auto ui = static_cast<std::size_t>(i);
    trend[ui] = sum / static_cast<double>(kernel);
    seasonal[ui] = x[ui] - trend[ui];
  }
  return {std::move(trend), std::move(seasonal)};
}

BackboneParams init_backbone(const BackboneConfig& config, std::uint64_t seed) {
  require(config.lookback >= 1 && config.horizon >= 1 && config.channels >= 1,
          "backbone dimensions must be positive");
  BackboneParams m;
  m.config = config;
  const auto rows = static_cast<Eigen::Index>(m.heads() * config.horizon);
  const auto l = static_cast<Eigen::Index>(config.lookback);
  const auto heads = static_cast<Eigen::Index>(m.heads());
  const auto h = static_cast<Eigen::Index>(config.horizon);
  const double bound = 1.0 / std::sqrt(static_cast<double>(config.lookback));
  auto rng = make_rng(seed, "backbone");
  m.weight.resize(rows, l);
  m.bias.resize(heads, h);
  if (config.kind == BackboneKind::linear) {
    fill_uniform(m.weight, bound, rng);
    fill_uniform(m.bias, bound, rng);
  } else {
    m.moving_average = moving_average_matrix(config.lookback, config.kernel);
    m.weight.setConstant(1.0 / static_cast<double>(config.lookback));
    m.trend_weight = Matrix::Constant(rows, l, 1.0 / static_cast<double>(config.lookback));
    m.trend_bias.resize(heads, h);
    fill_uniform(m.bias, bound, rng);
    fill_uniform(m.trend_bias, bound, rng);
  }
  return m;
}

BackboneParams zeros_like(const BackboneParams& model) {
  BackboneParams g = model;
  g.weight.setZero();
  g.bias.setZero();
  g.trend_weight.setZero();
  g.trend_bias.setZero();
  return g;
}

namespace {

void check_input(const BackboneParams& model, const MatrixRef& x) {
  require(static_cast<std::size_t>(x.rows()) == model.config.lookback,
          "backbone expects input length " + std::to_string(model.config.lookback) +
              ", got " + std::to_string(x.rows()));
}

}  // namespace

Matrix backbone_forward_channel(const BackboneParams& model, std::size_t channel,
                                const MatrixRef& x) {
  check_input(model, x);
  const auto h = static_cast<Eigen::Index>(model.config.horizon);
  const auto head = static_cast<Eigen::Index>(model.head(channel));
  const auto w = model.weight.middleRows(head * h, h);
  if (model.config.kind == BackboneKind::linear) {
    Matrix y = w * x;
    y.colwise() += model.bias.row(head).transpose();
    return y;
  }
  const Matrix trend = model.moving_average * x;
  const Matrix seasonal = x - trend;
  Matrix y = w * seasonal + model.trend_weight.middleRows(head * h, h) * trend;
  y.colwise() += (model.bias.row(head) + model.trend_bias.row(head)).transpose();
  return y;
}

void backbone_vjp_channel(const BackboneParams& model, std::size_t channel,
                          const MatrixRef& x, const MatrixRef& upstream,
                          BackboneParams& grad, Matrix* grad_x) {
  check_input(model, x);
  const auto h = static_cast<Eigen::Index>(model.config.horizon);
  const auto head = static_cast<Eigen::Index>(model.head(channel));
  const auto w = model.weight.middleRows(head * h, h);
  const Eigen::VectorXd bias_grad = upstream.rowwise().sum();
  if (model.config.kind == BackboneKind::linear) {
    grad.weight.middleRows(head * h, h).noalias() += upstream * x.transpose();
    grad.bias.row(head) += bias_grad.transpose();
    if (grad_x != nullptr) grad_x->noalias() = w.transpose() * upstream;
    return;
  }
  const Matrix trend = model.moving_average * x;
  const Matrix seasonal = x - trend;
  const auto wt = model.trend_weight.middleRows(head * h, h);
  grad.weight.middleRows(head * h, h).noalias() += upstream * seasonal.transpose();
  grad.trend_weight.middleRows(head * h, h).noalias() += upstream * trend.transpose();
  grad.bias.row(head) += bias_grad.transpose();
  grad.trend_bias.row(head) += bias_grad.transpose();
  if (grad_x != nullptr) {
    const Matrix g_seasonal = w.transpose() * upstream;
    const Matrix g_trend = wt.transpose() * upstream;
    *grad_x = g_seasonal + model.moving_average.transpose() * (g_trend - g_seasonal);
  }
}

Matrix backbone_forward(const BackboneParams& model, const MatrixRef& x) {
  check_input(model, x);
  require(static_cast<std::size_t>(x.cols()) == model.config.channels,
          "backbone expects " + std::to_string(model.config.channels) +
              " channels, got " + std::to_string(x.cols()));
  Matrix y(static_cast<Eigen::Index>(model.config.horizon), x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    y.col(c) = backbone_forward_channel(model, static_cast<std::size_t>(c), x.col(c));
  }
  return y;
}

BackboneGrads backbone_vjp(const BackboneParams& model, const MatrixRef& x,
                           const MatrixRef& upstream) {
  check_input(model, x);
  require(upstream.rows() == static_cast<Eigen::Index>(model.config.horizon) &&
              upstream.cols() == x.cols(),
          "upstream gradient shape does not match the forecast");
  BackboneGrads g{zeros_like(model), Matrix(x.rows(), x.cols())};
  Matrix gx;
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    backbone_vjp_channel(model, static_cast<std::size_t>(c), x.col(c), upstream.col(c),
                         g.params, &gx);
    g.x.col(c) = gx;
  }
  return g;
}

}  // namespace specshift
