#pragma once

#include <string>

#include "avse/tensor.hpp"

namespace avse::numerics {

namespace detail {

/// Source row and interpolation weight for output row t under align-corners
/// mapping. Integer arithmetic keeps both endpoints exact.
struct ResizeTap {
  std::size_t row;
  double frac;
};

inline ResizeTap resize_tap(std::size_t t, std::size_t src, std::size_t dst) {
  if (src == 1 || dst == 1) return {0, 0.0};
  const std::size_t num = t * (src - 1);
  const std::size_t den = dst - 1;
  return {num / den, double(num % den) / double(den)};
}

}  // namespace detail

/// Linear interpolation along the leading (time) axis with aligned corners:
/// x [T_v, D] -> [T_a, D]. A single input row is broadcast.
template <typename Real>
Tensor<Real> resize_linear_time(const Tensor<Real>& x, std::size_t target) {
  require_rank(x, 2, "resize_linear_time input");
  if (target == 0) throw ConfigError("resize_linear_time: target length must be >= 1");
  const std::size_t src = x.dim(0), d = x.dim(1);
  Tensor<Real> y({target, d});
  for (std::size_t t = 0; t < target; ++t) {
    const auto tap = detail::resize_tap(t, src, target);
    const Real* r0 = x.ptr() + tap.row * d;
    Real* out = y.ptr() + t * d;
    if (tap.frac == 0.0) {
      std::copy_n(r0, d, out);
      continue;
    }
    const Real* r1 = r0 + d;
    const Real a = Real(1.0 - tap.frac), b = Real(tap.frac);
    for (std::size_t j = 0; j < d; ++j) out[j] = a * r0[j] + b * r1[j];
  }
  return y;
}

template <typename Real>
Tensor<Real> resize_linear_time_vjp(const Shape& input_dims, const Tensor<Real>& gy) {
  const std::size_t src = input_dims[0], d = input_dims[1], target = gy.dim(0);
  require_shape(gy, {target, d}, "resize_linear_time cotangent");
  Tensor<Real> gx(input_dims);
  for (std::size_t t = 0; t < target; ++t) {
    const auto tap = detail::resize_tap(t, src, target);
    const Real* g = gy.ptr() + t * d;
    Real* r0 = gx.ptr() + tap.row * d;
    if (tap.frac == 0.0) {
      for (std::size_t j = 0; j < d; ++j) r0[j] += g[j];
      continue;
    }
    Real* r1 = r0 + d;
    const Real a = Real(1.0 - tap.frac), b = Real(tap.frac);
    for (std::size_t j = 0; j < d; ++j) {
      r0[j] += a * g[j];
      r1[j] += b * g[j];
    }
  }
  return gx;
}

}  // namespace avse::numerics
