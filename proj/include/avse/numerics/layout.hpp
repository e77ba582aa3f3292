#pragma once

#include <string>

#include "avse/tensor.hpp"

// Pure data-movement operations used to stitch the network together. Each
// comes with its adjoint.

namespace avse::numerics {

/// [A, B] -> [B, A]
template <typename Real>
Tensor<Real> transpose2d(const Tensor<Real>& x) {
  require_rank(x, 2, "transpose2d input");
  const std::size_t a = x.dim(0), b = x.dim(1);
  Tensor<Real> y({b, a});
  for (std::size_t i = 0; i < a; ++i)
    for (std::size_t j = 0; j < b; ++j) y[j * a + i] = x[i * b + j];
  return y;
}

/// [A, B, C] -> [B, A, C]; its own adjoint.
template <typename Real>
Tensor<Real> swap_leading(const Tensor<Real>& x) {
  require_rank(x, 3, "swap_leading input");
  const std::size_t a = x.dim(0), b = x.dim(1), c = x.dim(2);
  Tensor<Real> y({b, a, c});
  for (std::size_t i = 0; i < a; ++i)
    for (std::size_t j = 0; j < b; ++j)
      std::copy_n(x.ptr() + (i * b + j) * c, c, y.ptr() + (j * a + i) * c);
  return y;
}

/// Stack [N, T] on top of [D, T] -> [N + D, T].
template <typename Real>
Tensor<Real> concat_rows(const Tensor<Real>& top, const Tensor<Real>& bottom) {
  require_rank(top, 2, "concat_rows top");
  require_rank(bottom, 2, "concat_rows bottom");
  if (top.dim(1) != bottom.dim(1)) {
    throw ShapeError("concat_rows: column mismatch " + shape_string(top.dims()) + " vs " +
                     shape_string(bottom.dims()));
  }
  Tensor<Real> y({top.dim(0) + bottom.dim(0), top.dim(1)});
  std::copy(top.data().begin(), top.data().end(), y.ptr());
  std::copy(bottom.data().begin(), bottom.data().end(), y.ptr() + top.size());
  return y;
}

/// Splits the adjoint of concat_rows back into its two blocks.
template <typename Real>
std::pair<Tensor<Real>, Tensor<Real>> split_rows(const Tensor<Real>& g, std::size_t top_rows) {
  const std::size_t cols = g.dim(1), bottom_rows = g.dim(0) - top_rows;
  Tensor<Real> a({top_rows, cols}), b({bottom_rows, cols});
  std::copy_n(g.ptr(), a.size(), a.ptr());
  std::copy_n(g.ptr() + a.size(), b.size(), b.ptr());
  return {std::move(a), std::move(b)};
}

/// Chunking of a length-T sequence into Q windows of length P with hop
/// P/2; the tail is zero-padded so the last window is complete.
struct ChunkPlan {
  std::size_t length = 0;  // T
  std::size_t chunk = 0;   // P
  std::size_t hop = 0;
  std::size_t count = 0;   // Q

  static ChunkPlan make(std::size_t length, std::size_t chunk, std::size_t hop) {
    if (length == 0) throw ShapeError("segmentation of an empty sequence");
    if (chunk == 0 || hop == 0 || hop > chunk) throw ConfigError("invalid chunk/hop");
    ChunkPlan p{length, chunk, hop, 1};
    if (length > chunk) p.count = (length - chunk + hop - 1) / hop + 1;
    return p;
  }

  /// Number of windows covering position t < length.
  std::size_t coverage(std::size_t t) const {
    std::size_t n = 0;
    const std::size_t first = t >= chunk ? (t - chunk) / hop + 1 : 0;
    for (std::size_t q = first; q < count && q * hop <= t; ++q) ++n;
    return n;
  }
};

/// [C, T] -> [Q, P, C]: window q holds positions q*hop .. q*hop + P - 1.
template <typename Real>
Tensor<Real> segment(const Tensor<Real>& x, const ChunkPlan& plan) {
  require_rank(x, 2, "segment input");
  const std::size_t c = x.dim(0), t_len = x.dim(1);
  if (t_len != plan.length) throw ShapeError("segment: plan length mismatch");
  Tensor<Real> y({plan.count, plan.chunk, c});
  for (std::size_t q = 0; q < plan.count; ++q)
    for (std::size_t p = 0; p < plan.chunk; ++p) {
      const std::size_t t = q * plan.hop + p;
      if (t >= t_len) break;
      Real* dst = y.ptr() + (q * plan.chunk + p) * c;
      for (std::size_t ch = 0; ch < c; ++ch) dst[ch] = x[ch * t_len + t];
    }
  return y;
}

/// Adjoint of `segment`: plain summation of every window entry back onto
/// its source position (no normalization).
template <typename Real>
Tensor<Real> segment_vjp(const Tensor<Real>& gy, const ChunkPlan& plan) {
  const std::size_t c = gy.dim(2);
  Tensor<Real> gx({c, plan.length});
  for (std::size_t q = 0; q < plan.count; ++q)
    for (std::size_t p = 0; p < plan.chunk; ++p) {
      const std::size_t t = q * plan.hop + p;
      if (t >= plan.length) break;
      const Real* src = gy.ptr() + (q * plan.chunk + p) * c;
      for (std::size_t ch = 0; ch < c; ++ch) gx[ch * plan.length + t] += src[ch];
    }
  return gx;
}

/// [Q, P, C] -> [C, T]: sum overlapping windows, divide by coverage, drop
/// the padded tail.
template <typename Real>
Tensor<Real> overlap_add(const Tensor<Real>& x, const ChunkPlan& plan) {
  require_shape(x, {plan.count, plan.chunk, x.dim(2)}, "overlap_add input");
  const std::size_t c = x.dim(2);
  Tensor<Real> y({c, plan.length});
  for (std::size_t q = 0; q < plan.count; ++q)
    for (std::size_t p = 0; p < plan.chunk; ++p) {
      const std::size_t t = q * plan.hop + p;
      if (t >= plan.length) break;
      const Real* src = x.ptr() + (q * plan.chunk + p) * c;
      for (std::size_t ch = 0; ch < c; ++ch) y[ch * plan.length + t] += src[ch];
    }
  for (std::size_t t = 0; t < plan.length; ++t) {
    const Real n = Real(plan.coverage(t));
    for (std::size_t ch = 0; ch < c; ++ch) y[ch * plan.length + t] /= n;
  }
  return y;
}

template <typename Real>
Tensor<Real> overlap_add_vjp(const Tensor<Real>& gy, const ChunkPlan& plan) {
  const std::size_t c = gy.dim(0);
  require_shape(gy, {c, plan.length}, "overlap_add cotangent");
  Tensor<Real> gx({plan.count, plan.chunk, c});
  for (std::size_t q = 0; q < plan.count; ++q)
    for (std::size_t p = 0; p < plan.chunk; ++p) {
      const std::size_t t = q * plan.hop + p;
      if (t >= plan.length) break;
      const Real n = Real(plan.coverage(t));
      Real* dst = gx.ptr() + (q * plan.chunk + p) * c;
      for (std::size_t ch = 0; ch < c; ++ch) dst[ch] = gy[ch * plan.length + t] / n;
    }
  return gx;
}

/// Global spatial average per frame: [C, F, H, W] -> [F, C].
template <typename Real>
Tensor<Real> spatial_mean(const Tensor<Real>& x) {
  require_rank(x, 4, "spatial_mean input");
  const std::size_t c = x.dim(0), f = x.dim(1), hw = x.dim(2) * x.dim(3);
  Tensor<Real> y({f, c});
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t fr = 0; fr < f; ++fr) {
      const Real* p = x.ptr() + (ch * f + fr) * hw;
      double acc = 0.0;
      for (std::size_t i = 0; i < hw; ++i) acc += double(p[i]);
      y[fr * c + ch] = Real(acc / double(hw));
    }
  return y;
}

template <typename Real>
Tensor<Real> spatial_mean_vjp(const Shape& input_dims, const Tensor<Real>& gy) {
  const std::size_t c = input_dims[0], f = input_dims[1], hw = input_dims[2] * input_dims[3];
  require_shape(gy, {f, c}, "spatial_mean cotangent");
  Tensor<Real> gx(input_dims);
  const Real scale = Real(1) / Real(hw);
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t fr = 0; fr < f; ++fr) {
      const Real v = gy[fr * c + ch] * scale;
      std::fill_n(gx.ptr() + (ch * f + fr) * hw, hw, v);
    }
  return gx;
}

/// 1-D right zero-pad / trim to `length`.
template <typename Real>
Tensor<Real> fit_length(const Tensor<Real>& x, std::size_t length) {
  require_rank(x, 1, "fit_length input");
  Tensor<Real> y({length});
  std::copy_n(x.ptr(), std::min(length, x.size()), y.ptr());
  return y;
}

}  // namespace avse::numerics
