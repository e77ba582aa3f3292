#pragma once

#include <vector>

#include "avse/numerics/gemm.hpp"
#include "avse/tensor.hpp"

namespace avse::numerics {

/// Affine map along the trailing axis: x [..., D_in], w [D_out, D_in],
/// b [D_out] (or empty for no bias) -> [..., D_out].
template <typename Real>
Tensor<Real> linear(const Tensor<Real>& x, const Tensor<Real>& w, const Tensor<Real>& b) {
  require_rank(w, 2, "linear weight");
  const std::size_t d_out = w.dim(0), d_in = w.dim(1);
  if (x.empty() || x.dims().back() != d_in) {
    throw ShapeError("linear: trailing extent of " + shape_string(x.dims()) + " must be " +
                     std::to_string(d_in));
  }
  if (!b.empty()) require_shape(b, {d_out}, "linear bias");
  const std::size_t rows = x.size() / d_in;

  std::vector<Real> wt(d_in * d_out);
  transpose_into(d_out, d_in, w.ptr(), d_in, wt.data(), d_out);

  Shape out_dims = x.dims();
  out_dims.back() = d_out;
  Tensor<Real> y(out_dims);
  if (!b.empty()) {
    for (std::size_t r = 0; r < rows; ++r) std::copy(b.ptr(), b.ptr() + d_out, y.ptr() + r * d_out);
  }
  gemm_acc(rows, d_in, d_out, x.ptr(), d_in, wt.data(), d_out, y.ptr(), d_out);
  return y;
}

template <typename Real>
struct LinearGrads {
  Tensor<Real> input;
  Tensor<Real> weight;
  Tensor<Real> bias;
};

template <typename Real>
LinearGrads<Real> linear_vjp(const Tensor<Real>& x, const Tensor<Real>& w, bool has_bias,
                             const Tensor<Real>& gy) {
  const std::size_t d_out = w.dim(0), d_in = w.dim(1);
  const std::size_t rows = x.size() / d_in;
  Shape out_dims = x.dims();
  out_dims.back() = d_out;
  require_shape(gy, out_dims, "linear cotangent");

  LinearGrads<Real> g{Tensor<Real>(x.dims()), Tensor<Real>(w.dims()), {}};
  // gx = gy . W
  gemm_acc(rows, d_out, d_in, gy.ptr(), d_out, w.ptr(), d_in, g.input.ptr(), d_in);
  // gW = gy^T . x
  gemm_tn_acc(rows, d_out, d_in, gy.ptr(), d_out, x.ptr(), d_in, g.weight.ptr(), d_in);
  if (has_bias) {
    g.bias = Tensor<Real>({d_out});
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t o = 0; o < d_out; ++o) g.bias[o] += gy[r * d_out + o];
  }
  return g;
}

}  // namespace avse::numerics
