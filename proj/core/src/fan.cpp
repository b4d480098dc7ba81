#include "specshift/fan.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "specshift/error.hpp"
#include "specshift/spectral.hpp"

namespace specshift {

std::vector<std::size_t> top_k_indices(const std::vector<double>& values, std::size_t k) {
  require(k >= 1 && k <= values.size(), "k must be in [1, " +
                                            std::to_string(values.size()) + "], got " +
                                            std::to_string(k));
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

FanSplit fan_main_freq_part(const MatrixRef& x, std::size_t k) {
  const auto length = static_cast<std::size_t>(x.rows());
  require(length >= 2, "series length must be >= 2");
  const RealDft dft(length);
  const std::size_t bins = dft.bins();
  require(k >= 1 && k <= bins,
          "k must be in [1, " + std::to_string(bins) + "], got " + std::to_string(k));
  FanSplit out{Matrix(x.rows(), x.cols()), Matrix(x.rows(), x.cols())};
  std::vector<double> col(length), re(bins), im(bins), amp(bins), mre(bins), mim(bins),
      filtered(length);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (std::size_t n = 0; n < length; ++n) col[n] = x(static_cast<Eigen::Index>(n), j);
    dft.forward(col, re, im);
    for (std::size_t b = 0; b < bins; ++b) amp[b] = std::hypot(re[b], im[b]);
    std::fill(mre.begin(), mre.end(), 0.0);
    std::fill(mim.begin(), mim.end(), 0.0);
    for (std::size_t b : top_k_indices(amp, k)) {
      mre[b] = re[b];
      mim[b] = im[b];
    }
    dft.inverse(mre, mim, filtered);
    for (std::size_t n = 0; n < length; ++n) {
      const auto r = static_cast<Eigen::Index>(n);
      out.filtered(r, j) = filtered[n];
      out.residual(r, j) = col[n] - filtered[n];
    }
  }
  return out;
}

std::vector<ParamRef> FanParams::params(std::string_view prefix) {
  const std::string p(prefix);
  auto sh = [](const Matrix& m) {
    return std::vector<std::size_t>{static_cast<std::size_t>(m.rows()),
                                    static_cast<std::size_t>(m.cols())};
  };
  auto vec = [](const Matrix& m) {
    return std::vector<std::size_t>{static_cast<std::size_t>(m.rows())};
  };
  return {{p + "w1", sh(w1), &w1},          {p + "b1", vec(b1), &b1},
          {p + "w2", sh(w2), &w2},          {p + "b2", vec(b2), &b2},
          {p + "w3", sh(w3), &w3},          {p + "b3", vec(b3), &b3},
          {p + "combine", sh(combine), &combine}};
}

FanParams init_fan(std::size_t lookback, std::size_t horizon, std::size_t channels,
                   std::size_t k, std::uint64_t seed) {
  require(lookback >= 2 && horizon >= 1 && channels >= 1, "invalid FAN shape");
  require(k >= 1 && k <= bin_count(lookback),
          "k must be in [1, " + std::to_string(bin_count(lookback)) + "]");
  FanParams p;
  p.lookback = lookback;
  p.horizon = horizon;
  p.channels = channels;
  p.k = k;
  const auto l = static_cast<Eigen::Index>(lookback);
  const auto h = static_cast<Eigen::Index>(horizon);
  const auto h1 = static_cast<Eigen::Index>(kFanHidden1);
  const auto h2 = static_cast<Eigen::Index>(kFanHidden2);
  auto rng = make_rng(seed, "fan.init");
  // Affine layers use the U(-1/sqrt(fan_in), 1/sqrt(fan_in)) convention.
  auto layer = [&](Eigen::Index out, Eigen::Index in, Matrix& w, Matrix& b) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    w.resize(out, in);
    b.resize(out, 1);
    fill_uniform(w, bound, rng);
    fill_uniform(b, bound, rng);
  };
  layer(h1, l, p.w1, p.b1);
  layer(h2, h1 + l, p.w2, p.b2);
  layer(h, h2, p.w3, p.b3);
  p.combine = Matrix::Ones(2, static_cast<Eigen::Index>(channels));
  return p;
}

FanParams zeros_like(const FanParams& p) {
  FanParams z = p;
  for (auto& ref : z.params()) ref.value->setZero();
  return z;
}

Matrix fan_mlp_forward(const FanParams& p, const MatrixRef& filtered, const MatrixRef& x,
                       FanCache& cache) {
  require(filtered.rows() == p.w1.cols() && x.rows() == p.w1.cols() &&
              filtered.cols() == x.cols(),
          "FAN input shape mismatch");
  const Eigen::Index h1 = p.w1.rows();
  cache.pre1 = (p.w1 * filtered).colwise() + p.b1.col(0);
  cache.h1 = cache.pre1.cwiseMax(0.0);
  cache.pre2 = (p.w2.leftCols(h1) * cache.h1 + p.w2.rightCols(x.rows()) * x).colwise() +
               p.b2.col(0);
  cache.h2 = cache.pre2.cwiseMax(0.0);
  return (p.w3 * cache.h2).colwise() + p.b3.col(0);
}

void fan_mlp_vjp(const FanParams& p, const MatrixRef& filtered, const MatrixRef& x,
                 const FanCache& cache, const MatrixRef& upstream, FanParams& grad) {
  const Eigen::Index h1 = p.w1.rows();
  grad.w3 += upstream * cache.h2.transpose();
  grad.b3 += upstream.rowwise().sum();
  const Matrix d2 = (p.w3.transpose() * upstream)
                        .cwiseProduct((cache.pre2.array() > 0.0).cast<double>().matrix());
  grad.w2.leftCols(h1) += d2 * cache.h1.transpose();
  grad.w2.rightCols(x.rows()) += d2 * x.transpose();
  grad.b2 += d2.rowwise().sum();
  const Matrix d1 = (p.w2.leftCols(h1).transpose() * d2)
                        .cwiseProduct((cache.pre1.array() > 0.0).cast<double>().matrix());
  grad.w1 += d1 * filtered.transpose();
  grad.b1 += d1.rowwise().sum();
}

Matrix fan_forward(const MatrixRef& x, const FanParams& fan, const BackboneParams& backbone) {
  require(static_cast<std::size_t>(x.rows()) == fan.lookback &&
              static_cast<std::size_t>(x.cols()) == fan.channels,
          "input does not match the FAN shape");
  const FanSplit split = fan_main_freq_part(x, fan.k);
  FanCache cache;
  const Matrix main = fan_mlp_forward(fan, split.filtered, x, cache);
  const Matrix res = backbone_forward(backbone, split.residual);
  Matrix out(main.rows(), main.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    out.col(c) = fan.combine(0, c) * res.col(c) + fan.combine(1, c) * main.col(c);
  }
  return out;
}

}  // namespace specshift
