#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace specshift {

namespace fft {
class Plan;
}

/// Number of non-redundant bins of a real-input DFT of length `length`.
constexpr std::size_t bin_count(std::size_t length) noexcept {
  return length / 2 + 1;
}

/// Half spectrum of a real series: K = floor(L/2) + 1 complex bins.
///
/// Forward transforms are unnormalized, inverse transforms carry the 1/L.
/// Bin 0 (and bin K-1 for even L) always has an exactly zero imaginary part.
struct Spectrum {
  std::vector<double> real;
  std::vector<double> imag;
  std::size_t length = 0;

  std::size_t bins() const noexcept { return real.size(); }
};

enum class WindowKind { rectangular, hann };

WindowKind parse_window(std::string_view name);
std::string to_string(WindowKind kind);

/// Real-input forward/inverse DFT of a fixed length over caller-owned
/// buffers. This is the allocation-light path used inside training loops.
class RealDft {
 public:
  explicit RealDft(std::size_t length);

  std::size_t length() const noexcept { return length_; }
  std::size_t bins() const noexcept { return bin_count(length_); }

  void forward(std::span<const double> x, std::span<double> re,
               std::span<double> im) const;
  void inverse(std::span<const double> re, std::span<const double> im,
               std::span<double> x) const;

 private:
  std::size_t length_;
  const fft::Plan* plan_;
};

Spectrum dft_forward(std::span<const double> x);
std::vector<double> dft_inverse(const Spectrum& s);

std::vector<double> window_taps(WindowKind kind, std::size_t length);
std::vector<double> apply_window(std::span<const double> x, WindowKind kind);

/// Zeroes every bin with index >= keep.
Spectrum truncate_bins(Spectrum s, std::size_t keep);

std::vector<double> amplitude(const Spectrum& s);

/// Bins kept for a transform resolution of `resolution` points applied to a
/// series of `length`: floor(resolution/2)+1, capped at the full spectrum.
/// Zero means full resolution. For L = 96, resolution 96 keeps all 49 bins
/// and resolution 48 keeps the lowest 25.
std::size_t resolve_keep_bins(std::size_t resolution, std::size_t length);

}  // namespace specshift
