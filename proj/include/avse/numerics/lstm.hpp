#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "avse/numerics/activation.hpp"
#include "avse/numerics/fastmath.hpp"
#include "avse/numerics/gemm.hpp"
#include "avse/tensor.hpp"

namespace avse::numerics {

/// One direction of an LSTM. `weight` is [4H, D + H]: rows are the input,
/// forget, cell and output gate blocks (in that order), columns the input
/// features followed by the previous hidden state.
template <typename Real>
struct LstmDirection {
  Tensor<Real> weight;
  Tensor<Real> bias;  // [4H]
};

template <typename Real>
struct LstmParams {
  LstmDirection<Real> forward;
  LstmDirection<Real> backward;

  std::size_t hidden_size() const { return forward.bias.size() / 4; }
  std::size_t input_size() const { return forward.weight.dim(1) - hidden_size(); }

  void validate() const {
    for (const auto* d : {&forward, &backward}) {
      require_rank(d->weight, 2, "lstm weight");
      require_rank(d->bias, 1, "lstm bias");
      const std::size_t four_h = d->bias.dim(0);
      if (four_h % 4 != 0 || d->weight.dim(0) != four_h || d->weight.dim(1) <= four_h / 4) {
        throw ShapeError("lstm parameters are inconsistent: weight " +
                         shape_string(d->weight.dims()) + ", bias " + shape_string(d->bias.dims()));
      }
    }
    if (forward.weight.dims() != backward.weight.dims()) {
      throw ShapeError("lstm directions disagree on shape");
    }
  }

  static Shape weight_shape(std::size_t input, std::size_t hidden) {
    return {4 * hidden, input + hidden};
  }
  static std::size_t parameter_count(std::size_t input, std::size_t hidden) {
    return 2 * (4 * hidden * (input + hidden) + 4 * hidden);
  }
};

/// Forward-pass state kept for the vector-Jacobian product: per direction
/// the post-activation gates [B, T, 4H] and cell states [B, T, H].
template <typename Real>
struct BiLstmCache {
  std::array<Tensor<Real>, 2> gates;
  std::array<Tensor<Real>, 2> cells;
};

/// Bidirectional LSTM over a batch of independent sequences.
/// x [B, T, D] -> [B, T, 2H], forward-direction half first. Zero initial
/// hidden and cell state. Sequences never interact, and every scalar is
/// produced by the same operation sequence for any batch size B.
template <typename Real>
Tensor<Real> bilstm(const Tensor<Real>& x, const LstmParams<Real>& p,
                    BiLstmCache<Real>* cache = nullptr) {
  p.validate();
  require_rank(x, 3, "bilstm input");
  const std::size_t batch = x.dim(0), steps = x.dim(1), d_in = x.dim(2);
  const std::size_t hid = p.hidden_size(), g4 = 4 * hid, wcols = d_in + hid;
  if (p.input_size() != d_in) {
    throw ShapeError("bilstm: input features " + std::to_string(d_in) + " but parameters expect " +
                     std::to_string(p.input_size()));
  }

  Tensor<Real> y({batch, steps, 2 * hid});
  std::vector<Real> wxt(d_in * g4), wht(hid * g4), pre(batch * steps * g4), step(batch * g4);
  std::vector<Real> h(batch * hid), c(batch * hid), tc(batch * hid);

  for (int dir = 0; dir < 2; ++dir) {
    const auto& dp = dir == 0 ? p.forward : p.backward;
    transpose_into(g4, d_in, dp.weight.ptr(), wcols, wxt.data(), g4);
    transpose_into(g4, hid, dp.weight.ptr() + d_in, wcols, wht.data(), g4);
    for (std::size_t r = 0; r < batch * steps; ++r)
      std::copy(dp.bias.ptr(), dp.bias.ptr() + g4, pre.data() + r * g4);
    gemm_acc(batch * steps, d_in, g4, x.ptr(), d_in, wxt.data(), g4, pre.data(), g4);

    Real* gates_out = nullptr;
    Real* cells_out = nullptr;
    if (cache) {
      cache->gates[dir] = Tensor<Real>({batch, steps, g4});
      cache->cells[dir] = Tensor<Real>({batch, steps, hid});
      gates_out = cache->gates[dir].ptr();
      cells_out = cache->cells[dir].ptr();
    }

    std::fill(h.begin(), h.end(), Real(0));
    std::fill(c.begin(), c.end(), Real(0));
    for (std::size_t s = 0; s < steps; ++s) {
      const std::size_t t = dir == 0 ? s : steps - 1 - s;
      for (std::size_t b = 0; b < batch; ++b)
        std::copy_n(pre.data() + (b * steps + t) * g4, g4, step.data() + b * g4);
      if (s > 0) gemm_acc(batch, hid, g4, h.data(), hid, wht.data(), g4, step.data(), g4);
      for (std::size_t b = 0; b < batch; ++b) {
        Real* g = step.data() + b * g4;
        sigmoid_inplace(g, 2 * hid);
        tanh_inplace(g + 2 * hid, hid);
        sigmoid_inplace(g + 3 * hid, hid);
        Real* cb = c.data() + b * hid;
        Real* tb = tc.data() + b * hid;
        for (std::size_t j = 0; j < hid; ++j) {
          cb[j] = g[hid + j] * cb[j] + g[j] * g[2 * hid + j];
          tb[j] = cb[j];
        }
      }
      tanh_inplace(tc.data(), batch * hid);
      for (std::size_t b = 0; b < batch; ++b) {
        const Real* g = step.data() + b * g4;
        Real* hb = h.data() + b * hid;
        const Real* tb = tc.data() + b * hid;
        Real* yb = y.ptr() + (b * steps + t) * 2 * hid + dir * hid;
        for (std::size_t j = 0; j < hid; ++j) {
          hb[j] = g[3 * hid + j] * tb[j];
          yb[j] = hb[j];
        }
        if (cache) {
          std::copy_n(g, g4, gates_out + (b * steps + t) * g4);
          std::copy_n(c.data() + b * hid, hid, cells_out + (b * steps + t) * hid);
        }
      }
    }
  }
  return y;
}

/// Single-sequence form: x [T, D] -> [T, 2H].
template <typename Real>
Tensor<Real> bilstm_layer(const Tensor<Real>& x, const LstmParams<Real>& p) {
  require_rank(x, 2, "bilstm_layer input");
  return bilstm(x.reshaped({1, x.dim(0), x.dim(1)}), p).reshaped({x.dim(0), 2 * p.hidden_size()});
}

template <typename Real>
struct BiLstmGrads {
  Tensor<Real> input;
  LstmParams<Real> params;
};

/// Vector-Jacobian product of `bilstm`; `y` is its output and `cache` the
/// state it recorded.
template <typename Real>
BiLstmGrads<Real> bilstm_vjp(const Tensor<Real>& x, const LstmParams<Real>& p,
                             const BiLstmCache<Real>& cache, const Tensor<Real>& y,
                             const Tensor<Real>& gy) {
  const std::size_t batch = x.dim(0), steps = x.dim(1), d_in = x.dim(2);
  const std::size_t hid = p.hidden_size(), g4 = 4 * hid, wcols = d_in + hid;
  require_shape(gy, y.dims(), "bilstm cotangent");

  BiLstmGrads<Real> out;
  out.input = Tensor<Real>(x.dims());
  std::vector<Real> da(batch * steps * g4), hprev(batch * steps * hid);
  std::vector<Real> dh_rec(batch * hid), dc_rec(batch * hid);

  for (int dir = 0; dir < 2; ++dir) {
    const auto& dp = dir == 0 ? p.forward : p.backward;
    auto& gd = dir == 0 ? out.params.forward : out.params.backward;
    gd.weight = Tensor<Real>(dp.weight.dims());
    gd.bias = Tensor<Real>(dp.bias.dims());
    const Real* gates = cache.gates[dir].ptr();
    const Real* cells = cache.cells[dir].ptr();

    std::fill(dh_rec.begin(), dh_rec.end(), Real(0));
    std::fill(dc_rec.begin(), dc_rec.end(), Real(0));
    for (std::size_t si = steps; si-- > 0;) {
      const std::size_t t = dir == 0 ? si : steps - 1 - si;
      const bool first = si == 0;
      const std::size_t tp = dir == 0 ? t - 1 : t + 1;  // previous step in processing order
      for (std::size_t b = 0; b < batch; ++b) {
        const Real* g = gates + (b * steps + t) * g4;
        const Real* cb = cells + (b * steps + t) * hid;
        const Real* cprev = first ? nullptr : cells + (b * steps + tp) * hid;
        const Real* gyb = gy.ptr() + (b * steps + t) * 2 * hid + dir * hid;
        Real* dab = da.data() + (b * steps + t) * g4;
        Real* dhr = dh_rec.data() + b * hid;
        Real* dcr = dc_rec.data() + b * hid;
        Real* hp = hprev.data() + (b * steps + t) * hid;
        const Real* yprev = first ? nullptr : y.ptr() + (b * steps + tp) * 2 * hid + dir * hid;
        for (std::size_t j = 0; j < hid; ++j) {
          const Real ig = g[j], fg = g[hid + j], cg = g[2 * hid + j], og = g[3 * hid + j];
          const Real tc = tanh_gate(cb[j]);
          const Real dh = gyb[j] + dhr[j];
          const Real dout = dh * tc;
          const Real dc = dcr[j] + dh * og * (Real(1) - tc * tc);
          const Real cp = first ? Real(0) : cprev[j];
          dab[j] = dc * cg * ig * (Real(1) - ig);
          dab[hid + j] = dc * cp * fg * (Real(1) - fg);
          dab[2 * hid + j] = dc * ig * (Real(1) - cg * cg);
          dab[3 * hid + j] = dout * og * (Real(1) - og);
          dcr[j] = dc * fg;
          hp[j] = first ? Real(0) : yprev[j];
        }
      }
      std::fill(dh_rec.begin(), dh_rec.end(), Real(0));
      if (!first) {
        for (std::size_t b = 0; b < batch; ++b) {
          gemm_acc(1, g4, hid, da.data() + (b * steps + t) * g4, g4, dp.weight.ptr() + d_in, wcols,
                   dh_rec.data() + b * hid, hid);
        }
      }
    }
    const std::size_t rows = batch * steps;
    gemm_acc(rows, g4, d_in, da.data(), g4, dp.weight.ptr(), wcols, out.input.ptr(), d_in);
    gemm_tn_acc(rows, g4, d_in, da.data(), g4, x.ptr(), d_in, gd.weight.ptr(), wcols);
    gemm_tn_acc(rows, g4, hid, da.data(), g4, hprev.data(), hid, gd.weight.ptr() + d_in, wcols);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t k = 0; k < g4; ++k) gd.bias[k] += da[r * g4 + k];
  }
  return out;
}

}  // namespace avse::numerics
