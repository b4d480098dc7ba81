#include "specshift/tifo.hpp"

#include <algorithm>
#include <cmath>

#include "specshift/error.hpp"

namespace specshift {

ScoreInput parse_score_input(std::string_view name) {
  if (name == "raw") return ScoreInput::raw;
  if (name == "log1p") return ScoreInput::log1p;
  fail(ErrorKind::invalid_argument,
       "unknown score input '" + std::string(name) + "' (expected raw or log1p)");
}

std::string to_string(ScoreInput v) { return v == ScoreInput::raw ? "raw" : "log1p"; }

WeightActivation parse_weight_activation(std::string_view name) {
  if (name == "linear") return WeightActivation::linear;
  if (name == "relu") return WeightActivation::relu;
  fail(ErrorKind::invalid_argument, "unknown weight activation '" +
                                        std::string(name) + "' (expected linear or relu)");
}

std::string to_string(WeightActivation v) {
  return v == WeightActivation::linear ? "linear" : "relu";
}

std::vector<ParamRef> TifoParams::params(std::string_view prefix) {
  const std::string p(prefix);
  return {
      {p + "mlp_r.w1", {hidden, bins}, &real.w1}, {p + "mlp_r.b1", {hidden}, &real.b1},
      {p + "mlp_r.w2", {bins, hidden}, &real.w2}, {p + "mlp_r.b2", {bins}, &real.b2},
      {p + "mlp_i.w1", {hidden, bins}, &imag.w1}, {p + "mlp_i.b1", {hidden}, &imag.b1},
      {p + "mlp_i.w2", {bins, hidden}, &imag.w2}, {p + "mlp_i.b2", {bins}, &imag.b2},
  };
}

namespace {

WeightMlp init_mlp(std::size_t bins, std::size_t hidden, std::mt19937_64& rng) {
  const auto k = static_cast<Eigen::Index>(bins);
  const auto h = static_cast<Eigen::Index>(hidden);
  WeightMlp m;
  m.w1.resize(h, k);
  fill_uniform(m.w1, std::sqrt(6.0 / static_cast<double>(bins + hidden)), rng);
  m.b1 = Matrix::Zero(h, 1);
  m.w2 = Matrix::Zero(k, h);
  m.b2 = Matrix::Ones(k, 1);
  return m;
}

Matrix condition_scores(const TifoParams& params, const StabilityScores& scores) {
  require(scores.bins() == params.bins,
          "scores have " + std::to_string(scores.bins()) +
              " bins but the operator expects " + std::to_string(params.bins));
  require(scores.channels() == params.channels,
          "scores have " + std::to_string(scores.channels()) +
              " channels but the operator expects " + std::to_string(params.channels));
  if (params.input == ScoreInput::raw) return scores.values;
  return scores.values.array().log1p().matrix();
}

struct MlpTrace {
  Matrix pre_hidden;  // hidden x C
  Matrix hidden;      // hidden x C
  Matrix pre_out;     // K x C
};

Matrix mlp_forward(const WeightMlp& m, const Matrix& input, WeightActivation act,
                   MlpTrace* trace) {
  Matrix pre_hidden = (m.w1 * input).colwise() + m.b1.col(0);
  Matrix hidden = pre_hidden.cwiseMax(0.0);
  Matrix pre_out = (m.w2 * hidden).colwise() + m.b2.col(0);
  Matrix out = act == WeightActivation::relu ? Matrix(pre_out.cwiseMax(0.0)) : pre_out;
  if (trace != nullptr) {
    trace->pre_hidden = std::move(pre_hidden);
    trace->hidden = std::move(hidden);
    trace->pre_out = std::move(pre_out);
  }
  return out;
}

void mlp_vjp(const WeightMlp& m, const Matrix& input, WeightActivation act,
             const MlpTrace& trace, const Matrix& upstream, WeightMlp& grad) {
  Matrix g_out = upstream;
  if (act == WeightActivation::relu) {
    g_out = (trace.pre_out.array() > 0.0).select(upstream, 0.0);
  }
  grad.w2 += g_out * trace.hidden.transpose();
  grad.b2 += g_out.rowwise().sum();
  const Matrix g_hidden = m.w2.transpose() * g_out;
  const Matrix g_pre = (trace.pre_hidden.array() > 0.0).select(g_hidden, 0.0);
  grad.w1 += g_pre * input.transpose();
  grad.b1 += g_pre.rowwise().sum();
}

}  // namespace

TifoParams init_tifo(std::size_t bins, std::size_t channels, std::size_t hidden,
                     std::uint64_t seed, const TifoInitOptions& options) {
  require(bins >= 1 && channels >= 1 && hidden >= 1,
          "operator dimensions must be positive");
  TifoParams p;
  p.bins = bins;
  p.channels = channels;
  p.hidden = hidden;
  p.seed = seed;
  p.input = options.input;
  p.activation = options.activation;
  auto rng = make_rng(seed, "tifo");
  p.real = init_mlp(bins, hidden, rng);
  p.imag = init_mlp(bins, hidden, rng);
  return p;
}

FrequencyWeights weights(const TifoParams& params, const StabilityScores& scores) {
  const Matrix input = condition_scores(params, scores);
  return {mlp_forward(params.real, input, params.activation, nullptr),
          mlp_forward(params.imag, input, params.activation, nullptr)};
}

void weights_vjp(const TifoParams& params, const StabilityScores& scores,
                 const FrequencyWeights& upstream, TifoParams& grad) {
  const Matrix input = condition_scores(params, scores);
  MlpTrace trace;
  mlp_forward(params.real, input, params.activation, &trace);
  mlp_vjp(params.real, input, params.activation, trace, upstream.real, grad.real);
  mlp_forward(params.imag, input, params.activation, &trace);
  mlp_vjp(params.imag, input, params.activation, trace, upstream.imag, grad.imag);
}

FrequencyWeights alpha_scale(const FrequencyWeights& w, double alpha) {
  require(alpha >= 0.0 && alpha <= 1.0, "alpha must lie in [0, 1]");
  FrequencyWeights out;
  out.real = (alpha * w.real.array() + (1.0 - alpha)).matrix();
  out.imag = (alpha * w.imag.array() + (1.0 - alpha)).matrix();
  return out;
}

SpectralReweighter::SpectralReweighter(std::size_t length,
                                       const SpectralOptions& options)
    : dft_(length),
      keep_(options.keep == 0 ? bin_count(length) : options.keep),
      taps_(window_taps(options.window, length)),
      windowed_(options.window != WindowKind::rectangular),
      bin_weight_(bin_count(length)) {
  require(keep_ >= 1 && keep_ <= bin_count(length),
          "keep must be in [1, " + std::to_string(bin_count(length)) + "]");
  const double inv_len = 1.0 / static_cast<double>(length);
  for (std::size_t k = 0; k < bin_weight_.size(); ++k) {
    const bool self_conjugate = k == 0 || (length % 2 == 0 && k == length / 2);
    bin_weight_[k] = (self_conjugate ? 1.0 : 2.0) * inv_len;
  }
}

void SpectralReweighter::apply(std::span<const double> x,
                               std::span<const double> lambda_r,
                               std::span<const double> lambda_i,
                               std::span<double> y, std::span<double> re,
                               std::span<double> im) const {
  const std::size_t n = length();
  const std::size_t k_bins = bins();
  thread_local std::vector<double> xw, sre, sim;
  xw.resize(n);
  sre.resize(k_bins);
  sim.resize(k_bins);
  for (std::size_t i = 0; i < n; ++i) xw[i] = windowed_ ? x[i] * taps_[i] : x[i];
  dft_.forward(xw, sre, sim);
  for (std::size_t k = keep_; k < k_bins; ++k) sre[k] = sim[k] = 0.0;
  if (!re.empty()) {
    std::copy(sre.begin(), sre.end(), re.begin());
    std::copy(sim.begin(), sim.end(), im.begin());
  }
  for (std::size_t k = 0; k < keep_; ++k) {
    sre[k] *= lambda_r[k];
    sim[k] *= lambda_i[k];
  }
  dft_.inverse(sre, sim, y);
}

void SpectralReweighter::vjp(std::span<const double> upstream,
                             std::span<const double> re,
                             std::span<const double> im,
                             std::span<const double> lambda_r,
                             std::span<const double> lambda_i,
                             std::span<double> grad_r, std::span<double> grad_i,
                             std::span<double> grad_x) const {
  const std::size_t k_bins = bins();
  thread_local std::vector<double> gre, gim;
  gre.resize(k_bins);
  gim.resize(k_bins);
  dft_.forward(upstream, gre, gim);
  for (std::size_t k = 0; k < keep_; ++k) {
    grad_r[k] += bin_weight_[k] * gre[k] * re[k];
    grad_i[k] += bin_weight_[k] * gim[k] * im[k];
  }
  if (grad_x.empty()) return;
  for (std::size_t k = 0; k < k_bins; ++k) {
    if (k < keep_) {
      gre[k] *= lambda_r[k];
      gim[k] *= lambda_i[k];
    } else {
      gre[k] = gim[k] = 0.0;
    }
  }
  dft_.inverse(gre, gim, grad_x);
  if (windowed_) {
    for (std::size_t i = 0; i < grad_x.size(); ++i) grad_x[i] *= taps_[i];
  }
}

namespace {

void check_transform_shapes(const MatrixRef& x, const FrequencyWeights& w) {
  const auto bins = static_cast<Eigen::Index>(bin_count(static_cast<std::size_t>(x.rows())));
  require(x.rows() >= 2, "series must have length >= 2");
  require(w.real.rows() == bins && w.imag.rows() == bins,
          "weights have " + std::to_string(w.real.rows()) + " bins but a length-" +
              std::to_string(x.rows()) + " series has " + std::to_string(bins));
  require(w.real.cols() == x.cols() && w.imag.cols() == x.cols(),
          "weights have " + std::to_string(w.real.cols()) + " channels but input has " +
              std::to_string(x.cols()));
}

std::span<const double> col_span(const Matrix& m, Eigen::Index c) {
  return {m.data() + c * m.rows(), static_cast<std::size_t>(m.rows())};
}

std::span<double> col_span(Matrix& m, Eigen::Index c) {
  return {m.data() + c * m.rows(), static_cast<std::size_t>(m.rows())};
}

}  // namespace

Matrix transform(const MatrixRef& x, const FrequencyWeights& w,
                 const SpectralOptions& options) {
  check_transform_shapes(x, w);
  const SpectralReweighter op(static_cast<std::size_t>(x.rows()), options);
  const Matrix xc = x;
  Matrix y(x.rows(), x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    op.apply(col_span(xc, c), col_span(w.real, c), col_span(w.imag, c), col_span(y, c));
  }
  return y;
}

TransformGrads transform_vjp(const MatrixRef& x, const FrequencyWeights& w,
                             const MatrixRef& upstream,
                             const SpectralOptions& options) {
  check_transform_shapes(x, w);
  require(upstream.rows() == x.rows() && upstream.cols() == x.cols(),
          "upstream gradient shape does not match the input");
  const SpectralReweighter op(static_cast<std::size_t>(x.rows()), options);
  const auto bins = static_cast<Eigen::Index>(op.bins());
  const Matrix xc = x;
  const Matrix gc = upstream;
  TransformGrads g{Matrix(x.rows(), x.cols()), Matrix::Zero(bins, x.cols()),
                   Matrix::Zero(bins, x.cols())};
  std::vector<double> y(static_cast<std::size_t>(x.rows()));
  std::vector<double> re(op.bins()), im(op.bins());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    op.apply(col_span(xc, c), col_span(w.real, c), col_span(w.imag, c), y, re, im);
    op.vjp(col_span(gc, c), re, im, col_span(w.real, c), col_span(w.imag, c),
           col_span(g.lambda_r, c), col_span(g.lambda_i, c), col_span(g.x, c));
  }
  return g;
}

}  // namespace specshift
