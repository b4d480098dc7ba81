#include "specshift/fft.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "specshift/error.hpp"

namespace specshift::fft {

namespace {

std::size_t largest_prime_factor(std::size_t n) {
  std::size_t largest = 1;
  for (std::size_t p = 2; p * p <= n; ++p) {
    while (n % p == 0) {
      largest = p;
      n /= p;
    }
  }
  return n > 1 ? n : largest;
}

std::vector<std::size_t> factorize(std::size_t n) {
  std::vector<std::size_t> radices;
  std::size_t p = 4;
  while (n > 1) {
    while (n % p != 0) {
      p = (p == 4) ? 2 : (p == 2 ? 3 : p + 2);
      if (p * p > n) p = n;
    }
    radices.push_back(p);
    n /= p;
  }
  return radices;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t m = 1;
  while (m < n) m <<= 1;
  return m;
}

}  // namespace

struct Plan::Bluestein {
  std::size_t m;
  std::vector<Complex> chirp;      // exp(-i pi k^2 / n)
  std::vector<Complex> kernel_ft;  // FFT of the conjugate chirp, length m
  Plan inner;

  explicit Bluestein(std::size_t n)
      : m(next_pow2(2 * n - 1)), chirp(n), kernel_ft(m), inner(m) {
    const std::size_t period = 2 * n;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t k2 = (k * k) % period;
      const double angle = std::numbers::pi * static_cast<double>(k2) /
                           static_cast<double>(n);
      chirp[k] = Complex(std::cos(angle), -std::sin(angle));
    }
    std::vector<Complex> b(m, Complex(0.0, 0.0));
    b[0] = std::conj(chirp[0]);
    for (std::size_t k = 1; k < n; ++k) {
      b[k] = std::conj(chirp[k]);
      b[m - k] = std::conj(chirp[k]);
    }
    inner.forward(b, kernel_ft);
  }

  void forward(std::span<const Complex> in, std::span<Complex> out) const {
    thread_local std::vector<Complex> a;
    const std::size_t n = chirp.size();
    a.assign(m, Complex(0.0, 0.0));
    for (std::size_t k = 0; k < n; ++k) a[k] = in[k] * chirp[k];
    inner.forward(a, a);
    for (std::size_t k = 0; k < m; ++k) a[k] *= kernel_ft[k];
    inner.inverse(a, a);
    const double scale = 1.0 / static_cast<double>(m);
    for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * chirp[k] * scale;
  }
};

Plan::Plan(std::size_t n) : n_(n) {
  require(n >= 1, "fft plan length must be positive");
  if (largest_prime_factor(n) > kMaxDirectRadix) {
    bluestein_ = std::make_shared<const Bluestein>(n);
    return;
  }
  radices_ = factorize(n);
  std::size_t remaining = n;
  for (std::size_t p : radices_) {
    remaining /= p;
    spans_.push_back(remaining);
  }
  twiddles_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double angle =
        2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
    twiddles_[j] = Complex(std::cos(angle), -std::sin(angle));
  }
}

void Plan::forward(std::span<const Complex> in, std::span<Complex> out) const {
  require(in.size() >= n_ && out.size() >= n_, "fft buffer shorter than plan");
  if (bluestein_) {
    bluestein_->forward(in, out);
  } else {
    mixed_radix(in.data(), out.data());
  }
}

void Plan::inverse(std::span<const Complex> in, std::span<Complex> out) const {
  require(in.size() >= n_ && out.size() >= n_, "fft buffer shorter than plan");
  thread_local std::vector<Complex> conj_in;
  conj_in.resize(n_);
  for (std::size_t k = 0; k < n_; ++k) conj_in[k] = std::conj(in[k]);
  forward(conj_in, out);
  for (std::size_t k = 0; k < n_; ++k) out[k] = std::conj(out[k]);
}

void Plan::mixed_radix(const Complex* in, Complex* out) const {
  if (n_ == 1) {
    out[0] = in[0];
    return;
  }
  thread_local std::vector<Complex> source;
  source.assign(in, in + n_);
  work(out, source.data(), 1, 0);
}

void Plan::work(Complex* out, const Complex* in, std::size_t fstride,
                std::size_t level) const {
  const std::size_t p = radices_[level];
  const std::size_t m = spans_[level];
  if (m == 1) {
    for (std::size_t j = 0; j < p; ++j) out[j] = in[j * fstride];
  } else {
    for (std::size_t j = 0; j < p; ++j) {
      work(out + j * m, in + j * fstride, fstride * p, level + 1);
    }
  }
  butterfly(out, fstride, m, p);
}

void Plan::butterfly(Complex* out, std::size_t fstride, std::size_t m,
                     std::size_t p) const {
  const Complex* tw = twiddles_.data();
  switch (p) {
    case 2:
      for (std::size_t k = 0; k < m; ++k) {
        const Complex t = out[k + m] * tw[k * fstride];
        out[k + m] = out[k] - t;
        out[k] += t;
      }
      return;
    case 3: {
      const double epi3_imag = tw[fstride * m].imag();
      for (std::size_t k = 0; k < m; ++k) {
        const Complex s1 = out[k + m] * tw[k * fstride];
        const Complex s2 = out[k + 2 * m] * tw[2 * k * fstride];
        const Complex s3 = s1 + s2;
        const Complex s0 = (s1 - s2) * epi3_imag;
        const Complex mid = out[k] - s3 * 0.5;
        out[k] += s3;
        out[k + 2 * m] = Complex(mid.real() + s0.imag(), mid.imag() - s0.real());
        out[k + m] = Complex(mid.real() - s0.imag(), mid.imag() + s0.real());
      }
      return;
    }
    case 4:
      for (std::size_t k = 0; k < m; ++k) {
        const Complex s0 = out[k + m] * tw[k * fstride];
        const Complex s1 = out[k + 2 * m] * tw[2 * k * fstride];
        const Complex s2 = out[k + 3 * m] * tw[3 * k * fstride];
        const Complex s5 = out[k] - s1;
        const Complex a0 = out[k] + s1;
        const Complex s3 = s0 + s2;
        const Complex s4 = s0 - s2;
        out[k] = a0 + s3;
        out[k + 2 * m] = a0 - s3;
        out[k + m] = Complex(s5.real() + s4.imag(), s5.imag() - s4.real());
        out[k + 3 * m] = Complex(s5.real() - s4.imag(), s5.imag() + s4.real());
      }
      return;
    default:
      break;
  }

  thread_local std::vector<Complex> scratch;
  scratch.resize(p);
  for (std::size_t u = 0; u < m; ++u) {
    for (std::size_t q = 0, k = u; q < p; ++q, k += m) scratch[q] = out[k];
    for (std::size_t q1 = 0, k = u; q1 < p; ++q1, k += m) {
      std::size_t twidx = 0;
      Complex acc = scratch[0];
      for (std::size_t q = 1; q < p; ++q) {
        twidx += fstride * k;
        if (twidx >= n_) twidx -= n_;
        acc += scratch[q] * tw[twidx];
      }
      out[k] = acc;
    }
  }
}

const Plan& plan_for(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, std::unique_ptr<const Plan>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<const Plan>(n);
  return *slot;
}

}  // namespace specshift::fft
