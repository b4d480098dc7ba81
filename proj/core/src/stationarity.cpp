#include "specshift/stationarity.hpp"

#include <cmath>

#include "specshift/error.hpp"

namespace specshift {

AmplitudePanel::AmplitudePanel(std::size_t samples, std::size_t bins,
                               std::size_t channels)
    : samples_(samples),
      bins_(bins),
      channels_(channels),
      values_(samples * bins * channels, 0.0) {}

std::vector<double> AmplitudePanel::column(std::size_t k, std::size_t c) const {
  std::vector<double> out(samples_);
  for (std::size_t i = 0; i < samples_; ++i) out[i] = at(i, k, c);
  return out;
}

AmplitudePanel build_panel(std::size_t count, const WindowSource& window_at,
                           const SpectralOptions& options) {
  require(count >= 1, "amplitude panel needs at least one window");
  const MatrixRef first = window_at(0);
  const auto length = static_cast<std::size_t>(first.rows());
  const auto channels = static_cast<std::size_t>(first.cols());
  const RealDft dft(length);
  const std::size_t bins = dft.bins();
  const std::size_t keep = options.keep == 0 ? bins : options.keep;
  require(keep >= 1 && keep <= bins, "keep out of range for panel");
  const auto taps = window_taps(options.window, length);

  AmplitudePanel panel(count, bins, channels);
  std::vector<double> x(length), re(bins), im(bins);
  for (std::size_t i = 0; i < count; ++i) {
    const MatrixRef w = window_at(i);
    require(static_cast<std::size_t>(w.rows()) == length &&
                static_cast<std::size_t>(w.cols()) == channels,
            "windows in a panel must share one shape");
    for (std::size_t c = 0; c < channels; ++c) {
      for (std::size_t n = 0; n < length; ++n) x[n] = w(n, c) * taps[n];
      dft.forward(x, re, im);
      for (std::size_t k = 0; k < keep; ++k) panel.at(i, k, c) = std::hypot(re[k], im[k]);
    }
  }
  return panel;
}

ScoreMetric parse_metric(std::string_view name) {
  if (name == "mu_sigma") return ScoreMetric::mu_sigma;
  if (name == "entropy") return ScoreMetric::entropy;
  if (name == "correlation" || name == "corr") return ScoreMetric::correlation;
  fail(ErrorKind::invalid_argument, "unknown score metric '" + std::string(name) +
                                        "' (expected mu_sigma, entropy or correlation)");
}

std::string to_string(ScoreMetric metric) {
  switch (metric) {
    case ScoreMetric::mu_sigma:
      return "mu_sigma";
    case ScoreMetric::entropy:
      return "entropy";
    case ScoreMetric::correlation:
      return "correlation";
  }
  return "mu_sigma";
}

StabilityScores stability_scores(const AmplitudePanel& panel, double epsilon) {
  require(panel.samples() >= 2,
          "stability scores need at least 2 samples, got " +
              std::to_string(panel.samples()));
  require(epsilon > 0.0, "epsilon must be positive");
  const std::size_t n = panel.samples();
  const auto inv_n = 1.0 / static_cast<double>(n);
  StabilityScores out;
  out.values = Matrix::Zero(static_cast<Eigen::Index>(panel.bins()),
                            static_cast<Eigen::Index>(panel.channels()));
  out.metric = ScoreMetric::mu_sigma;
  out.epsilon = epsilon;
  out.sample_count = n;
  for (std::size_t k = 0; k < panel.bins(); ++k) {
    for (std::size_t c = 0; c < panel.channels(); ++c) {
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += panel.at(i, k, c);
      mean *= inv_n;
      double var = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = panel.at(i, k, c) - mean;
        var += d * d;
      }
      var *= inv_n;
      out.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) =
          mean / (std::sqrt(var) + epsilon);
    }
  }
  return out;
}

StabilityScores entropy_scores(const AmplitudePanel& panel) {
  require(panel.samples() >= 1, "entropy scores need at least 1 sample");
  const std::size_t bins = panel.bins();
  require(bins >= 2, "entropy scores need at least 2 bins");
  const std::size_t n = panel.samples();
  const double h_max = std::log2(static_cast<double>(bins));

  StabilityScores out;
  out.values = Matrix::Zero(static_cast<Eigen::Index>(bins),
                            static_cast<Eigen::Index>(panel.channels()));
  out.metric = ScoreMetric::entropy;
  out.sample_count = n;

  std::vector<double> mass(bins);
  for (std::size_t c = 0; c < panel.channels(); ++c) {
    std::vector<double> mean_mass(bins, 0.0);
    double mean_entropy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double total = 0.0;
      for (std::size_t k = 0; k < bins; ++k) total += panel.at(i, k, c);
      for (std::size_t k = 0; k < bins; ++k) {
        mass[k] = total > 0.0 ? panel.at(i, k, c) / total
                              : 1.0 / static_cast<double>(bins);
      }
      double h = 0.0;
      for (double p : mass) {
        if (p > 0.0) h -= p * std::log2(p);
      }
      mean_entropy += h;
      for (std::size_t k = 0; k < bins; ++k) mean_mass[k] += mass[k];
    }
    mean_entropy /= static_cast<double>(n);
    const double concentration = std::max(0.0, 1.0 - mean_entropy / h_max);
    for (std::size_t k = 0; k < bins; ++k) {
      out.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) =
          concentration * (mean_mass[k] / static_cast<double>(n)) *
          static_cast<double>(bins);
    }
  }
  return out;
}

StabilityScores correlation_scores(const AmplitudePanel& panel,
                                   const Matrix& target_means) {
  require(panel.samples() >= 3, "correlation scores need at least 3 samples");
  require(static_cast<std::size_t>(target_means.rows()) == panel.samples(),
          "target means have " + std::to_string(target_means.rows()) +
              " rows but the panel has " + std::to_string(panel.samples()) +
              " samples");
  require(static_cast<std::size_t>(target_means.cols()) == panel.channels(),
          "target means channel count does not match the panel");
  const std::size_t n = panel.samples();
  const double inv_n = 1.0 / static_cast<double>(n);

  StabilityScores out;
  out.values = Matrix::Zero(static_cast<Eigen::Index>(panel.bins()),
                            static_cast<Eigen::Index>(panel.channels()));
  out.metric = ScoreMetric::correlation;
  out.sample_count = n;
  for (std::size_t c = 0; c < panel.channels(); ++c) {
    const auto cc = static_cast<Eigen::Index>(c);
    const double t_mean = target_means.col(cc).mean();
    double t_var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = target_means(static_cast<Eigen::Index>(i), cc) - t_mean;
      t_var += d * d;
    }
    for (std::size_t k = 0; k < panel.bins(); ++k) {
      double a_mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) a_mean += panel.at(i, k, c);
      a_mean *= inv_n;
      double a_var = 0.0;
      double cov = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double da = panel.at(i, k, c) - a_mean;
        const double dt = target_means(static_cast<Eigen::Index>(i), cc) - t_mean;
        a_var += da * da;
        cov += da * dt;
      }
      double r = 0.0;
      if (a_var > 0.0 && t_var > 0.0) r = std::abs(cov) / std::sqrt(a_var * t_var);
      out.values(static_cast<Eigen::Index>(k), cc) = std::min(r, 1.0);
    }
  }
  return out;
}

StabilityScores ema_refresh(const StabilityScores& scores,
                            const AmplitudePanel& batch_panel, double decay) {
  require(decay > 0.0 && decay < 1.0, "ema decay must lie in (0, 1)");
  require(batch_panel.samples() >= 2, "ema refresh needs a batch of at least 2 windows");
  require(batch_panel.bins() == scores.bins() &&
              batch_panel.channels() == scores.channels(),
          "batch panel shape does not match the scores");
  StabilityScores batch;
  switch (scores.metric) {
    case ScoreMetric::mu_sigma:
      batch = stability_scores(batch_panel, scores.epsilon);
      break;
    case ScoreMetric::entropy:
      batch = entropy_scores(batch_panel);
      break;
    case ScoreMetric::correlation:
      fail(ErrorKind::invalid_argument,
           "correlation scores need targets and cannot be refreshed online");
  }
  StabilityScores out = scores;
  out.values = decay * scores.values + (1.0 - decay) * batch.values;
  return out;
}

}  // namespace specshift
