#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <vector>

#include "avse/tensor.hpp"

namespace avse::metrics {

/// Zero-phase polyphase resampler by the rational factor up/down, using a
/// Kaiser-windowed sinc (beta 5) with half-length `kHalfLenPerRate` taps per
/// unit of max(up, down) on the upsampled grid.
class RationalResampler {
 public:
  static constexpr std::size_t kHalfLenPerRate = 16;
  static constexpr double kKaiserBeta = 5.0;
  static constexpr std::uint64_t kMaxFactor = 1024;

  RationalResampler(double from_hz, double to_hz) {
    if (!(from_hz > 0.0) || !(to_hz > 0.0) || from_hz != std::floor(from_hz) ||
        to_hz != std::floor(to_hz)) {
      throw ConfigError("resample: rates must be positive integers in Hz");
    }
    const auto from = std::uint64_t(from_hz), to = std::uint64_t(to_hz);
    const std::uint64_t g = std::gcd(from, to);
    up_ = to / g;
    down_ = from / g;
    if (up_ > kMaxFactor || down_ > kMaxFactor) {
      throw ConfigError("resample: ratio " + std::to_string(to) + "/" + std::to_string(from) +
                        " does not reduce to small integers");
    }
    design();
  }

  std::size_t up() const { return up_; }
  std::size_t down() const { return down_; }
  const std::vector<double>& taps() const { return taps_; }

  /// ceil(T * up / down) output samples.
  std::size_t output_length(std::size_t n) const { return (n * up_ + down_ - 1) / down_; }

  template <typename Real>
  Tensor<Real> operator()(const Tensor<Real>& x) const {
    require_rank(x, 1, "resample input");
    const std::size_t n_in = x.size(), n_out = output_length(n_in);
    const auto half = std::ptrdiff_t(half_len_);
    const auto up = std::ptrdiff_t(up_);
    std::vector<Real> out(n_out);
    for (std::size_t n = 0; n < n_out; ++n) {
      const std::ptrdiff_t u = std::ptrdiff_t(n * down_);
      // input j contributes through tap half + u - j*up, valid when |u - j*up| <= half
      std::ptrdiff_t j_lo = u - half <= 0 ? 0 : (u - half + up - 1) / up;
      std::ptrdiff_t j_hi = std::min<std::ptrdiff_t>(std::ptrdiff_t(n_in) - 1, (u + half) / up);
      double acc = 0.0;
      for (std::ptrdiff_t j = j_lo; j <= j_hi; ++j)
        acc += taps_[std::size_t(half + u - j * up)] * double(x[std::size_t(j)]);
      out[n] = Real(acc);
    }
    return Tensor<Real>({n_out}, std::move(out));
  }

 private:
  void design() {
    if (up_ == 1 && down_ == 1) {
      half_len_ = 0;
      taps_ = {1.0};
      return;
    }
    const std::size_t max_rate = std::max(up_, down_);
    half_len_ = kHalfLenPerRate * max_rate;
    const std::size_t len = 2 * half_len_ + 1;
    const double cutoff = 1.0 / double(max_rate);  // fraction of the upsampled Nyquist
    const double i0_beta = std::cyl_bessel_i(0.0, kKaiserBeta);
    taps_.resize(len);
    for (std::size_t i = 0; i < len; ++i) {
      const double m = double(i) - double(half_len_);
      const double arg = std::numbers::pi * cutoff * m;
      const double sinc = m == 0.0 ? 1.0 : std::sin(arg) / arg;
      const double r = m / double(half_len_);
      const double win = std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(std::max(0.0, 1.0 - r * r))) /
                         i0_beta;
      taps_[i] = cutoff * sinc * win;
    }
    // Unit DC gain for every polyphase branch, so a constant input maps to
    // the same constant away from the edges.
    for (std::size_t phase = 0; phase < up_; ++phase) {
      double branch = 0.0;
      for (std::size_t i = phase; i < len; i += up_) branch += taps_[i];
      for (std::size_t i = phase; i < len; i += up_) taps_[i] /= branch;
    }
  }

  std::size_t up_ = 1;
  std::size_t down_ = 1;
  std::size_t half_len_ = 0;
  std::vector<double> taps_;
};

template <typename Real>
Tensor<Real> resample(const Tensor<Real>& x, double from_hz, double to_hz) {
  return RationalResampler(from_hz, to_hz)(x);
}

}  // namespace avse::metrics
