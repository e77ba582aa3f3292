#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "avse/tensor.hpp"

namespace avse::numerics {

/// Convolution geometry. `kernel`, `stride` and `padding` carry one extent
/// per convolved axis: one for the 1-D codec layers, three (time, height,
/// width) for the visual front end and trunk.
struct ConvSpec {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::vector<std::size_t> kernel{1};
  std::vector<std::size_t> stride{1};
  std::vector<std::size_t> padding{0};
  bool bias = true;

  std::size_t axes() const { return kernel.size(); }

  void validate(std::size_t expected_axes) const {
    if (kernel.size() != expected_axes || stride.size() != expected_axes ||
        padding.size() != expected_axes) {
      throw ConfigError("conv spec must have " + std::to_string(expected_axes) +
                        " kernel/stride/padding extents");
    }
    if (in_channels == 0 || out_channels == 0) throw ConfigError("conv channels must be >= 1");
    for (std::size_t a = 0; a < expected_axes; ++a) {
      if (kernel[a] == 0 || stride[a] == 0) throw ConfigError("conv kernel and stride must be >= 1");
    }
  }

  /// [out, in, k...] for conv1d / conv3d.
  Shape weight_shape() const {
    Shape s{out_channels, in_channels};
    s.insert(s.end(), kernel.begin(), kernel.end());
    return s;
  }

  /// [in, out, k] for the transposed convolution.
  Shape transposed_weight_shape() const {
    Shape s{in_channels, out_channels};
    s.insert(s.end(), kernel.begin(), kernel.end());
    return s;
  }

  std::size_t weight_count() const { return shape_size(weight_shape()); }
  std::size_t parameter_count() const { return weight_count() + (bias ? out_channels : 0); }
};

/// floor((n + 2p - k) / s) + 1; throws when the padded input is shorter than
/// the kernel.
inline std::size_t conv_output_extent(std::size_t n, std::size_t k, std::size_t s, std::size_t p) {
  if (n + 2 * p < k) {
    throw InputTooShortError("input extent " + std::to_string(n) + " (padding " +
                             std::to_string(p) + ") is shorter than kernel " + std::to_string(k));
  }
  return (n + 2 * p - k) / s + 1;
}

inline std::size_t conv_transpose_output_extent(std::size_t n, std::size_t k, std::size_t s) {
  return (n - 1) * s + k;
}

namespace detail {

struct Span1 {
  std::size_t lo = 0;
  std::size_t hi = 0;  // exclusive
};

/// Output positions t < out_n whose tap t*s + k - p lands inside [0, in_n).
inline Span1 valid_taps(std::size_t out_n, std::size_t in_n, std::size_t k, std::size_t s,
                        std::size_t p) {
  Span1 r;
  r.lo = k >= p ? 0 : (p - k + s - 1) / s;
  if (in_n + p < k + 1) return {0, 0};
  r.hi = std::min(out_n, (in_n - 1 + p - k) / s + 1);
  if (r.lo > r.hi) r.lo = r.hi;
  return r;
}

template <typename Real>
void check_bias(const Tensor<Real>& b, const ConvSpec& spec, const char* what) {
  if (spec.bias) require_shape(b, {spec.out_channels}, what);
}

}  // namespace detail

template <typename Real>
struct ConvGrads {
  Tensor<Real> input;
  Tensor<Real> weight;
  Tensor<Real> bias;  // empty when the spec has no bias
};

// ---------------------------------------------------------------------------
// 1-D convolution: x [C_in, T], w [C_out, C_in, K], b [C_out] -> [C_out, T'].

template <typename Real>
Tensor<Real> conv1d(const Tensor<Real>& x, const Tensor<Real>& w, const Tensor<Real>& b,
                    const ConvSpec& spec) {
  spec.validate(1);
  require_rank(x, 2, "conv1d input");
  if (x.dim(0) != spec.in_channels) throw ShapeError("conv1d: input channel mismatch");
  require_shape(w, spec.weight_shape(), "conv1d weight");
  detail::check_bias(b, spec, "conv1d bias");

  const std::size_t cin = spec.in_channels, cout = spec.out_channels;
  const std::size_t k = spec.kernel[0], s = spec.stride[0], p = spec.padding[0];
  const std::size_t t_in = x.dim(1);
  const std::size_t t_out = conv_output_extent(t_in, k, s, p);

  Tensor<Real> y({cout, t_out});
  for (std::size_t o = 0; o < cout; ++o) {
    Real* yrow = y.ptr() + o * t_out;
    if (spec.bias) std::fill(yrow, yrow + t_out, b[o]);
    for (std::size_t i = 0; i < cin; ++i) {
      const Real* xrow = x.ptr() + i * t_in;
      for (std::size_t kk = 0; kk < k; ++kk) {
        const Real wv = w[(o * cin + i) * k + kk];
        const auto r = detail::valid_taps(t_out, t_in, kk, s, p);
        if (s == 1) {
          for (std::size_t t = r.lo; t < r.hi; ++t) yrow[t] += wv * xrow[t + kk - p];
        } else {
          for (std::size_t t = r.lo; t < r.hi; ++t) yrow[t] += wv * xrow[t * s + kk - p];
        }
      }
    }
  }
  return y;
}

template <typename Real>
ConvGrads<Real> conv1d_vjp(const Tensor<Real>& x, const Tensor<Real>& w, const ConvSpec& spec,
                           const Tensor<Real>& gy) {
  const std::size_t cin = spec.in_channels, cout = spec.out_channels;
  const std::size_t k = spec.kernel[0], s = spec.stride[0], p = spec.padding[0];
  const std::size_t t_in = x.dim(1);
  const std::size_t t_out = conv_output_extent(t_in, k, s, p);
  require_shape(gy, {cout, t_out}, "conv1d cotangent");

  ConvGrads<Real> g{Tensor<Real>(x.dims()), Tensor<Real>(w.dims()), {}};
  if (spec.bias) g.bias = Tensor<Real>({cout});
  for (std::size_t o = 0; o < cout; ++o) {
    const Real* gyrow = gy.ptr() + o * t_out;
    if (spec.bias) {
      Real acc = 0;
      for (std::size_t t = 0; t < t_out; ++t) acc += gyrow[t];
      g.bias[o] = acc;
    }
    for (std::size_t i = 0; i < cin; ++i) {
      const Real* xrow = x.ptr() + i * t_in;
      Real* gxrow = g.input.ptr() + i * t_in;
      for (std::size_t kk = 0; kk < k; ++kk) {
        const std::size_t widx = (o * cin + i) * k + kk;
        const Real wv = w[widx];
        const auto r = detail::valid_taps(t_out, t_in, kk, s, p);
        Real acc = 0;
        for (std::size_t t = r.lo; t < r.hi; ++t) {
          const std::size_t src = t * s + kk - p;
          gxrow[src] += wv * gyrow[t];
          acc += gyrow[t] * xrow[src];
        }
        g.weight[widx] = acc;
      }
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Transposed 1-D convolution: x [C_in, T], w [C_in, C_out, K], b [C_out]
// -> [C_out, (T - 1) * S + K]. Scatter-add; with zero bias this is the
// adjoint of conv1d using the same weight tensor.

template <typename Real>
Tensor<Real> conv_transpose1d(const Tensor<Real>& x, const Tensor<Real>& w, const Tensor<Real>& b,
                              const ConvSpec& spec) {
  spec.validate(1);
  if (spec.padding[0] != 0) throw ConfigError("conv_transpose1d does not support padding");
  require_rank(x, 2, "conv_transpose1d input");
  if (x.dim(0) != spec.in_channels) throw ShapeError("conv_transpose1d: input channel mismatch");
  require_shape(w, spec.transposed_weight_shape(), "conv_transpose1d weight");
  detail::check_bias(b, spec, "conv_transpose1d bias");

  const std::size_t cin = spec.in_channels, cout = spec.out_channels;
  const std::size_t k = spec.kernel[0], s = spec.stride[0];
  const std::size_t t_in = x.dim(1);
  const std::size_t t_out = conv_transpose_output_extent(t_in, k, s);

  Tensor<Real> y({cout, t_out});
  if (spec.bias) {
    for (std::size_t o = 0; o < cout; ++o) std::fill_n(y.ptr() + o * t_out, t_out, b[o]);
  }
  for (std::size_t i = 0; i < cin; ++i) {
    const Real* xrow = x.ptr() + i * t_in;
    for (std::size_t o = 0; o < cout; ++o) {
      Real* yrow = y.ptr() + o * t_out;
      for (std::size_t kk = 0; kk < k; ++kk) {
        const Real wv = w[(i * cout + o) * k + kk];
        for (std::size_t t = 0; t < t_in; ++t) yrow[t * s + kk] += wv * xrow[t];
      }
    }
  }
  return y;
}

template <typename Real>
ConvGrads<Real> conv_transpose1d_vjp(const Tensor<Real>& x, const Tensor<Real>& w,
                                     const ConvSpec& spec, const Tensor<Real>& gy) {
  const std::size_t cin = spec.in_channels, cout = spec.out_channels;
  const std::size_t k = spec.kernel[0], s = spec.stride[0];
  const std::size_t t_in = x.dim(1);
  const std::size_t t_out = conv_transpose_output_extent(t_in, k, s);
  require_shape(gy, {cout, t_out}, "conv_transpose1d cotangent");

  ConvGrads<Real> g{Tensor<Real>(x.dims()), Tensor<Real>(w.dims()), {}};
  if (spec.bias) {
    g.bias = Tensor<Real>({cout});
    for (std::size_t o = 0; o < cout; ++o) {
      Real acc = 0;
      for (std::size_t t = 0; t < t_out; ++t) acc += gy[o * t_out + t];
      g.bias[o] = acc;
    }
  }
  for (std::size_t i = 0; i < cin; ++i) {
    const Real* xrow = x.ptr() + i * t_in;
    Real* gxrow = g.input.ptr() + i * t_in;
    for (std::size_t o = 0; o < cout; ++o) {
      const Real* gyrow = gy.ptr() + o * t_out;
      for (std::size_t kk = 0; kk < k; ++kk) {
        const std::size_t widx = (i * cout + o) * k + kk;
        const Real wv = w[widx];
        Real acc = 0;
        for (std::size_t t = 0; t < t_in; ++t) {
          const Real gv = gyrow[t * s + kk];
          gxrow[t] += wv * gv;
          acc += xrow[t] * gv;
        }
        g.weight[widx] = acc;
      }
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// 3-D convolution: x [C_in, F, H, W], w [C_out, C_in, kF, kH, kW].
// Valid cross-correlation over the zero-padded input with per-axis strides.

namespace detail {

struct Geometry3 {
  std::size_t in[3];
  std::size_t out[3];
  std::size_t k[3];
  std::size_t s[3];
  std::size_t p[3];
};

inline Geometry3 geometry3(const Shape& xdims, const ConvSpec& spec) {
  Geometry3 g{};
  for (int a = 0; a < 3; ++a) {
    g.in[a] = xdims[a + 1];
    g.k[a] = spec.kernel[a];
    g.s[a] = spec.stride[a];
    g.p[a] = spec.padding[a];
    g.out[a] = conv_output_extent(g.in[a], g.k[a], g.s[a], g.p[a]);
  }
  return g;
}

/// Visits every (output index, input index) pair touched by kernel tap
/// (a, b, c) for a single channel pair. `fn(out_offset, in_offset)` where
/// offsets are within one channel plane.
template <typename Fn>
void for_each_tap3(const Geometry3& g, std::size_t a, std::size_t b, std::size_t c, Fn&& fn) {
  const auto rf = valid_taps(g.out[0], g.in[0], a, g.s[0], g.p[0]);
  const auto rh = valid_taps(g.out[1], g.in[1], b, g.s[1], g.p[1]);
  const auto rw = valid_taps(g.out[2], g.in[2], c, g.s[2], g.p[2]);
  for (std::size_t f = rf.lo; f < rf.hi; ++f) {
    const std::size_t fi = f * g.s[0] + a - g.p[0];
    for (std::size_t h = rh.lo; h < rh.hi; ++h) {
      const std::size_t hi = h * g.s[1] + b - g.p[1];
      const std::size_t obase = (f * g.out[1] + h) * g.out[2];
      const std::size_t ibase = (fi * g.in[1] + hi) * g.in[2];
      fn(obase, ibase, rw.lo, rw.hi, c);
    }
  }
}

}  // namespace detail

template <typename Real>
Tensor<Real> conv3d(const Tensor<Real>& x, const Tensor<Real>& w, const Tensor<Real>& b,
                    const ConvSpec& spec) {
  spec.validate(3);
  require_rank(x, 4, "conv3d input");
  if (x.dim(0) != spec.in_channels) throw ShapeError("conv3d: input channel mismatch");
  require_shape(w, spec.weight_shape(), "conv3d weight");
  detail::check_bias(b, spec, "conv3d bias");

  const auto g = detail::geometry3(x.dims(), spec);
  const std::size_t cin = spec.in_channels, cout = spec.out_channels;
  const std::size_t in_plane = g.in[0] * g.in[1] * g.in[2];
  const std::size_t out_plane = g.out[0] * g.out[1] * g.out[2];
  const std::size_t taps = g.k[0] * g.k[1] * g.k[2];
  const std::size_t sw = g.s[2], pw = g.p[2];

  Tensor<Real> y({cout, g.out[0], g.out[1], g.out[2]});
  for (std::size_t o = 0; o < cout; ++o) {
    Real* yp = y.ptr() + o * out_plane;
    if (spec.bias) std::fill_n(yp, out_plane, b[o]);
    for (std::size_t i = 0; i < cin; ++i) {
      const Real* xp = x.ptr() + i * in_plane;
      const Real* wp = w.ptr() + (o * cin + i) * taps;
      for (std::size_t a = 0; a < g.k[0]; ++a)
        for (std::size_t bb = 0; bb < g.k[1]; ++bb)
          for (std::size_t c = 0; c < g.k[2]; ++c) {
            const Real wv = wp[(a * g.k[1] + bb) * g.k[2] + c];
            detail::for_each_tap3(g, a, bb, c,
                                  [&](std::size_t ob, std::size_t ib, std::size_t lo,
                                      std::size_t hi, std::size_t cc) {
                                    for (std::size_t t = lo; t < hi; ++t)
                                      yp[ob + t] += wv * xp[ib + t * sw + cc - pw];
                                  });
          }
    }
  }
  return y;
}

template <typename Real>
ConvGrads<Real> conv3d_vjp(const Tensor<Real>& x, const Tensor<Real>& w, const ConvSpec& spec,
                           const Tensor<Real>& gy) {
  const auto g = detail::geometry3(x.dims(), spec);
  const std::size_t cin = spec.in_channels, cout = spec.out_channels;
  require_shape(gy, {cout, g.out[0], g.out[1], g.out[2]}, "conv3d cotangent");
  const std::size_t in_plane = g.in[0] * g.in[1] * g.in[2];
  const std::size_t out_plane = g.out[0] * g.out[1] * g.out[2];
  const std::size_t taps = g.k[0] * g.k[1] * g.k[2];
  const std::size_t sw = g.s[2], pw = g.p[2];

  ConvGrads<Real> gr{Tensor<Real>(x.dims()), Tensor<Real>(w.dims()), {}};
  if (spec.bias) gr.bias = Tensor<Real>({cout});
  for (std::size_t o = 0; o < cout; ++o) {
    const Real* gp = gy.ptr() + o * out_plane;
    if (spec.bias) {
      Real acc = 0;
      for (std::size_t t = 0; t < out_plane; ++t) acc += gp[t];
      gr.bias[o] = acc;
    }
    for (std::size_t i = 0; i < cin; ++i) {
      const Real* xp = x.ptr() + i * in_plane;
      Real* gxp = gr.input.ptr() + i * in_plane;
      const std::size_t wbase = (o * cin + i) * taps;
      for (std::size_t a = 0; a < g.k[0]; ++a)
        for (std::size_t bb = 0; bb < g.k[1]; ++bb)
          for (std::size_t c = 0; c < g.k[2]; ++c) {
            const std::size_t widx = wbase + (a * g.k[1] + bb) * g.k[2] + c;
            const Real wv = w[widx];
            Real acc = 0;
            detail::for_each_tap3(g, a, bb, c,
                                  [&](std::size_t ob, std::size_t ib, std::size_t lo,
                                      std::size_t hi, std::size_t cc) {
                                    for (std::size_t t = lo; t < hi; ++t) {
                                      const std::size_t src = ib + t * sw + cc - pw;
                                      gxp[src] += wv * gp[ob + t];
                                      acc += gp[ob + t] * xp[src];
                                    }
                                  });
            gr.weight[widx] = acc;
          }
    }
  }
  return gr;
}

}  // namespace avse::numerics
