#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace specshift::fft {

using Complex = std::complex<double>;

/// Precomputed complex DFT of a fixed length.
///
/// Lengths whose prime factors are all small use a mixed-radix Cooley-Tukey
/// recursion (radix 2/3/4 butterflies plus a generic one). Lengths with a
/// large prime factor go through Bluestein's chirp-z algorithm on a
/// power-of-two convolution. Both directions are unnormalized.
class Plan {
 public:
  explicit Plan(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  bool uses_bluestein() const noexcept { return bluestein_ != nullptr; }

  /// out[k] = sum_n in[n] exp(-2 pi i k n / N). `in` and `out` may alias.
  void forward(std::span<const Complex> in, std::span<Complex> out) const;
  /// out[n] = sum_k in[k] exp(+2 pi i k n / N), no 1/N factor.
  void inverse(std::span<const Complex> in, std::span<Complex> out) const;

 private:
  struct Bluestein;

  void mixed_radix(const Complex* in, Complex* out) const;
  void work(Complex* out, const Complex* in, std::size_t fstride,
            std::size_t level) const;
  void butterfly(Complex* out, std::size_t fstride, std::size_t m,
                 std::size_t p) const;

  std::size_t n_;
  std::vector<std::size_t> radices_;  // p_0, p_1, ... with product n_
  std::vector<std::size_t> spans_;    // m at each level
  std::vector<Complex> twiddles_;     // exp(-2 pi i j / n_)
  std::shared_ptr<const Bluestein> bluestein_;
};

/// Process-wide plan cache; safe to call from several threads.
const Plan& plan_for(std::size_t n);

/// Largest prime factor that still goes through the mixed-radix path.
inline constexpr std::size_t kMaxDirectRadix = 13;

}  // namespace specshift::fft
