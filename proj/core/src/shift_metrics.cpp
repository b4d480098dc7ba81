#include "specshift/shift_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "specshift/error.hpp"

namespace specshift {

std::pair<std::vector<double>, std::vector<double>> paired_histograms(
    std::span<const double> a, std::span<const double> b, std::size_t bins) {
  require(!a.empty() && !b.empty(), "histogram samples must be non-empty");
  require(bins >= 2, "histogram needs at least 2 bins");
  const auto [amin, amax] = std::minmax_element(a.begin(), a.end());
  const auto [bmin, bmax] = std::minmax_element(b.begin(), b.end());
  const double lo = std::min(*amin, *bmin);
  const double hi = std::max(*amax, *bmax);
  std::vector<double> p(bins, 0.0), q(bins, 0.0);
  const double width = (hi - lo) / static_cast<double>(bins);
  auto bin_of = [&](double v) -> std::size_t {
    if (!(hi > lo)) return 0;
    if (v >= hi) return bins - 1;  // right edge is closed
    const auto i = static_cast<std::size_t>((v - lo) / width);
    return std::min(i, bins - 1);
  };
  for (double v : a) p[bin_of(v)] += 1.0;
  for (double v : b) q[bin_of(v)] += 1.0;
  for (double& v : p) v /= static_cast<double>(a.size());
  for (double& v : q) v /= static_cast<double>(b.size());
  return {std::move(p), std::move(q)};
}

double jsd2(std::span<const double> p, std::span<const double> q) {
  require(p.size() == q.size() && !p.empty(), "distributions must have equal, non-zero length");
  double sp = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    require(p[i] >= 0.0 && q[i] >= 0.0, "probabilities must be non-negative");
    sp += p[i];
    sq += q[i];
  }
  require(std::abs(sp - 1.0) <= 1e-9 && std::abs(sq - 1.0) <= 1e-9,
          "distributions must sum to 1");
  auto kl_term = [](double x, double m) { return x > 0.0 ? x * std::log2(x / m) : 0.0; };
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    d += 0.5 * kl_term(p[i], m) + 0.5 * kl_term(q[i], m);
  }
  return std::clamp(d, 0.0, 1.0);
}

double ks(std::span<const double> a, std::span<const double> b) {
  require(!a.empty() && !b.empty(), "KS samples must be non-empty");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const auto na = static_cast<double>(x.size());
  const auto nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double best = 0.0;
  while (i < x.size() || j < y.size()) {
    // Advance past every copy of the next smallest value in both samples.
    double v;
    if (j == y.size() || (i < x.size() && x[i] <= y[j])) {
      v = x[i];
    } else {
      v = y[j];
    }
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    best = std::max(best, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return best;
}

ShiftReport shift_report(const AmplitudePanel& train, const AmplitudePanel& test,
                         std::size_t bins) {
  require(train.bins() == test.bins() && train.channels() == test.channels(),
          "panels differ in bins or channels");
  require(train.samples() >= 1 && test.samples() >= 1, "panels must be non-empty");
  const auto k = static_cast<Eigen::Index>(train.bins());
  const auto c = static_cast<Eigen::Index>(train.channels());
  ShiftReport r;
  r.jsd2.resize(k, c);
  r.ks.resize(k, c);
  r.histogram_bins = bins;
  r.train_samples = train.samples();
  r.test_samples = test.samples();
  for (Eigen::Index ch = 0; ch < c; ++ch) {
    for (Eigen::Index kk = 0; kk < k; ++kk) {
      const auto a = train.column(static_cast<std::size_t>(kk), static_cast<std::size_t>(ch));
      const auto b = test.column(static_cast<std::size_t>(kk), static_cast<std::size_t>(ch));
      const auto [p, q] = paired_histograms(a, b, bins);
      r.jsd2(kk, ch) = jsd2(p, q);
      r.ks(kk, ch) = ks(a, b);
    }
  }
  r.mean_jsd2 = r.jsd2.mean();
  r.mean_ks = r.ks.mean();
  return r;
}

double percentile(std::vector<double> values, double q) {
  require(!values.empty(), "percentile of an empty set");
  require(q >= 0.0 && q <= 100.0, "percentile must be in [0, 100]");
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

}  // namespace specshift
