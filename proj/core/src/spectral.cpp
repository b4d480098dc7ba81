#include "specshift/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "specshift/error.hpp"
#include "specshift/fft.hpp"

namespace specshift {

namespace {

void check_series(std::span<const double> x) {
  require(x.size() >= 2, "series must have length >= 2, got " +
                             std::to_string(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) {
      fail(ErrorKind::numeric,
           "series value at index " + std::to_string(i) + " is not finite");
    }
  }
}

}  // namespace

WindowKind parse_window(std::string_view name) {
  if (name == "rect" || name == "rectangular") return WindowKind::rectangular;
  if (name == "hann") return WindowKind::hann;
  fail(ErrorKind::invalid_argument,
       "unknown window '" + std::string(name) + "' (expected rect or hann)");
}

std::string to_string(WindowKind kind) {
  return kind == WindowKind::hann ? "hann" : "rect";
}

RealDft::RealDft(std::size_t length)
    : length_(length), plan_(&fft::plan_for(length)) {
  require(length >= 2, "transform length must be >= 2");
}

void RealDft::forward(std::span<const double> x, std::span<double> re,
                      std::span<double> im) const {
  const std::size_t k_bins = bins();
  require(x.size() == length_ && re.size() == k_bins && im.size() == k_bins,
          "RealDft::forward buffer size mismatch");
  thread_local std::vector<fft::Complex> buf;
  buf.resize(length_);
  for (std::size_t n = 0; n < length_; ++n) buf[n] = fft::Complex(x[n], 0.0);
  plan_->forward(buf, buf);
  for (std::size_t k = 0; k < k_bins; ++k) {
    re[k] = buf[k].real();
    im[k] = buf[k].imag();
  }
  im[0] = 0.0;
  if (length_ % 2 == 0) im[k_bins - 1] = 0.0;
}

void RealDft::inverse(std::span<const double> re, std::span<const double> im,
                      std::span<double> x) const {
  const std::size_t k_bins = bins();
  require(x.size() == length_ && re.size() == k_bins && im.size() == k_bins,
          "RealDft::inverse buffer size mismatch");
  thread_local std::vector<fft::Complex> buf;
  buf.resize(length_);
  for (std::size_t k = 0; k < k_bins; ++k) buf[k] = fft::Complex(re[k], im[k]);
  for (std::size_t k = k_bins; k < length_; ++k) buf[k] = std::conj(buf[length_ - k]);
  plan_->inverse(buf, buf);
  const double scale = 1.0 / static_cast<double>(length_);
  for (std::size_t n = 0; n < length_; ++n) x[n] = buf[n].real() * scale;
}

Spectrum dft_forward(std::span<const double> x) {
  check_series(x);
  const RealDft dft(x.size());
  Spectrum s;
  s.length = x.size();
  s.real.resize(dft.bins());
  s.imag.resize(dft.bins());
  dft.forward(x, s.real, s.imag);
  return s;
}

std::vector<double> dft_inverse(const Spectrum& s) {
  require(s.length >= 2, "spectrum origin length must be >= 2");
  require(s.real.size() == bin_count(s.length) && s.imag.size() == s.real.size(),
          "spectrum has " + std::to_string(s.real.size()) +
              " bins, inconsistent with length " + std::to_string(s.length));
  const RealDft dft(s.length);
  std::vector<double> x(s.length);
  dft.inverse(s.real, s.imag, x);
  return x;
}

std::vector<double> window_taps(WindowKind kind, std::size_t length) {
  std::vector<double> taps(length, 1.0);
  if (kind == WindowKind::hann && length > 1) {
    const double denom = static_cast<double>(length - 1);
    for (std::size_t n = 0; n < length; ++n) {
      taps[n] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi *
                                      static_cast<double>(n) / denom));
    }
  }
  return taps;
}

std::vector<double> apply_window(std::span<const double> x, WindowKind kind) {
  std::vector<double> out(x.begin(), x.end());
  if (kind == WindowKind::rectangular) return out;
  const auto taps = window_taps(kind, x.size());
  for (std::size_t n = 0; n < out.size(); ++n) out[n] *= taps[n];
  return out;
}

Spectrum truncate_bins(Spectrum s, std::size_t keep) {
  require(keep >= 1 && keep <= s.bins(),
          "keep must be in [1, " + std::to_string(s.bins()) + "], got " +
              std::to_string(keep));
  for (std::size_t k = keep; k < s.bins(); ++k) {
    s.real[k] = 0.0;
    s.imag[k] = 0.0;
  }
  return s;
}

std::vector<double> amplitude(const Spectrum& s) {
  std::vector<double> a(s.bins());
  for (std::size_t k = 0; k < a.size(); ++k) a[k] = std::hypot(s.real[k], s.imag[k]);
  return a;
}

std::size_t resolve_keep_bins(std::size_t resolution, std::size_t length) {
  const std::size_t full = bin_count(length);
  if (resolution == 0) return full;
  return std::min(full, bin_count(resolution));
}

}  // namespace specshift
