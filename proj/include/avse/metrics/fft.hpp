#pragma once

#include <complex>
#include <numbers>
#include <vector>

#include "avse/error.hpp"

namespace avse::metrics {

/// In-place iterative radix-2 FFT (forward, no scaling).
inline void fft_inplace(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0) throw ConfigError("fft length must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / double(len);
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> w(std::cos(ang * double(k)), std::sin(ang * double(k)));
        const auto u = a[i + k];
        const auto v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
      }
    }
  }
}

/// |X[k]|^2 for k = 0 .. n/2 of a real frame zero-padded to n.
inline std::vector<double> power_spectrum(const std::vector<double>& frame, std::size_t n) {
  std::vector<std::complex<double>> buf(n);
  for (std::size_t i = 0; i < frame.size() && i < n; ++i) buf[i] = frame[i];
  fft_inplace(buf);
  std::vector<double> out(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) out[k] = std::norm(buf[k]);
  return out;
}

}  // namespace avse::metrics
