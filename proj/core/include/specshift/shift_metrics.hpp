#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "specshift/linalg.hpp"
#include "specshift/stationarity.hpp"

namespace specshift {

inline constexpr std::size_t kDefaultHistogramBins = 50;

/// Equal-width histograms of `a` and `b` over the range of their union,
/// normalized to probability vectors. A degenerate range puts all mass in
/// bin 0 of both.
std::pair<std::vector<double>, std::vector<double>> paired_histograms(
    std::span<const double> a, std::span<const double> b,
    std::size_t bins = kDefaultHistogramBins);

/// Base-2 Jensen-Shannon divergence (the squared JS distance), in [0, 1].
double jsd2(std::span<const double> p, std::span<const double> q);

/// Two-sample Kolmogorov-Smirnov statistic.
double ks(std::span<const double> a, std::span<const double> b);

/// Per-(k, c) distances between two amplitude panels.
struct ShiftReport {
  Matrix jsd2;  // K x C
  Matrix ks;    // K x C
  double mean_jsd2 = 0.0;
  double mean_ks = 0.0;
  std::size_t histogram_bins = kDefaultHistogramBins;
  std::size_t train_samples = 0;
  std::size_t test_samples = 0;
};

ShiftReport shift_report(const AmplitudePanel& train, const AmplitudePanel& test,
                         std::size_t bins = kDefaultHistogramBins);

/// Linear-interpolated percentile (0..100) of the values, numpy style.
double percentile(std::vector<double> values, double q);

}  // namespace specshift
