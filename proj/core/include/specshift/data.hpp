#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "specshift/linalg.hpp"

namespace specshift {

/// T x C numeric table with channel names and an optional leading
/// timestamp column kept verbatim.
struct RawSeries {
  Matrix values;
  std::vector<std::string> channel_names;
  std::vector<std::string> timestamps;  // empty when the file had none
  std::string timestamp_name;

  std::size_t rows() const noexcept { return static_cast<std::size_t>(values.rows()); }
  std::size_t channels() const noexcept { return static_cast<std::size_t>(values.cols()); }
};

/// Reads a headered CSV. A first column with non-numeric content is taken as
/// a timestamp column; every other column must be numeric and finite.
RawSeries load_csv(const std::filesystem::path& path);
RawSeries parse_csv(const std::string& text, const std::string& origin = "<memory>");
void write_csv(const std::filesystem::path& path, const RawSeries& series);

enum class Split { train, val, test };

const char* to_string(Split split);

struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const noexcept { return end - begin; }
};

/// Stride-1 (input, target) windows over one or more segments.
///
/// Windows are views into the stored segments, so z-scoring a segment
/// rescales inputs and targets together. Splits are contiguous index ranges
/// ordered train, val, test.
class WindowedDataset {
 public:
  WindowedDataset() = default;

  std::size_t lookback() const noexcept { return lookback_; }
  std::size_t horizon() const noexcept { return horizon_; }
  std::size_t channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return windows_.size(); }

  Eigen::Block<const Matrix> input(std::size_t i) const;
  Eigen::Block<const Matrix> target(std::size_t i) const;

  bool is_split() const noexcept { return split_; }
  IndexRange range(Split split) const;

  bool is_normalized() const noexcept { return normalized_; }
  const Vector& channel_mean() const noexcept { return mean_; }
  const Vector& channel_std() const noexcept { return std_; }

  const std::vector<Matrix>& segments() const noexcept { return segments_; }

  /// Builds windows over independent segments, each exactly L + H rows long,
  /// with explicit split sizes (test takes the remainder).
  static WindowedDataset from_samples(std::vector<Matrix> samples, std::size_t lookback,
                                      std::size_t horizon, std::size_t n_train,
                                      std::size_t n_val);

 private:
  friend WindowedDataset make_windows(const RawSeries& raw, std::size_t lookback,
                                      std::size_t horizon);
  friend WindowedDataset chronological_split(WindowedDataset dataset,
                                             std::array<double, 3> ratios);
  friend WindowedDataset zscore_fit_apply(WindowedDataset dataset);

  struct WindowRef {
    std::uint32_t segment;
    std::uint32_t start;
  };

  std::vector<Matrix> segments_;
  std::vector<WindowRef> windows_;
  std::size_t lookback_ = 0;
  std::size_t horizon_ = 0;
  std::size_t channels_ = 0;
  bool split_ = false;
  std::size_t train_end_ = 0;
  std::size_t val_end_ = 0;
  bool normalized_ = false;
  Vector mean_;
  Vector std_;
};

/// N = T - L - H + 1 windows; window i covers rows [i, i+L), target [i+L, i+L+H).
WindowedDataset make_windows(const RawSeries& raw, std::size_t lookback,
                             std::size_t horizon);

/// Boundaries at floor(r0 * N) and floor((r0 + r1) * N). Needs N >= 10.
WindowedDataset chronological_split(WindowedDataset dataset,
                                    std::array<double, 3> ratios = {0.7, 0.2, 0.1});

inline constexpr double kZscoreEpsilon = 1e-8;

/// Per-channel mean and population std over every value of every train input
/// window, applied to all segments.
WindowedDataset zscore_fit_apply(WindowedDataset dataset);

/// Gathers one channel of a set of windows into column-per-sample matrices.
void gather_channel(const WindowedDataset& data, const std::vector<std::size_t>& indices,
                    std::size_t channel, Matrix& inputs, Matrix& targets);

std::vector<std::size_t> indices_of(const WindowedDataset& data, Split split);

}  // namespace specshift
