#ifndef WAVGUARD_FFT_HPP
#define WAVGUARD_FFT_HPP

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace wavguard {

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// In-place iterative radix-2 FFT. Size must be a power of two.
// inverse = true computes the unscaled inverse transform.
inline void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("fft: size must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const auto u = a[i + k];
        const auto v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

// Magnitude of the analytic signal of x. The transform runs over x framed by
// `context` zeros on each side (rounded up to a power of two); the padding is
// discarded from the result.
inline std::vector<double> analytic_magnitude(std::span<const double> x, std::size_t context) {
  if (x.empty()) return {};
  const std::size_t n = next_pow2(x.size() + 2 * context);
  std::vector<std::complex<double>> buf(n);
  for (std::size_t i = 0; i < x.size(); ++i) buf[context + i] = x[i];
  fft_inplace(buf, false);
  // One-sided spectrum: keep DC and Nyquist, double positive bins, zero negative bins.
  for (std::size_t k = 1; k < n / 2; ++k) buf[k] *= 2.0;
  for (std::size_t k = n / 2 + 1; k < n; ++k) buf[k] = 0.0;
  fft_inplace(buf, true);
  std::vector<double> out(x.size());
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::abs(buf[context + i]) * scale;
  return out;
}

}  // namespace wavguard

#endif  // WAVGUARD_FFT_HPP
