#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "avse/tensor.hpp"

namespace avse::numerics {

template <typename Real>
struct GroupNormParams {
  std::size_t groups = 1;
  Tensor<Real> gamma;  // [C]
  Tensor<Real> beta;   // [C]
  double eps = 1e-5;

  void validate(std::size_t channels) const {
    if (groups == 0 || channels % groups != 0) {
      throw ConfigError("group_norm: " + std::to_string(groups) + " groups do not divide " +
                        std::to_string(channels) + " channels");
    }
    if (!(eps > 0.0)) throw ConfigError("group_norm: eps must be positive");
    require_shape(gamma, {channels}, "group_norm gamma");
    require_shape(beta, {channels}, "group_norm beta");
  }
};

/// Where the channel axis sits. kFirst: x is [C, ...] (statistics over all
/// trailing entries). kLast: x is [..., C].
enum class ChannelAxis { kFirst, kLast };

template <typename Real>
struct GroupNormCache {
  Tensor<Real> normalized;       // pre-affine output, same shape as x
  std::vector<double> inv_std;   // per group
};

namespace detail {

struct NormLayout {
  std::size_t channels;
  std::size_t length;
  std::size_t cstride;
  std::size_t lstride;
};

inline NormLayout norm_layout(const Shape& dims, ChannelAxis axis) {
  if (dims.size() < 2) throw ShapeError("group_norm needs rank >= 2, got " + shape_string(dims));
  const std::size_t total = shape_size(dims);
  if (axis == ChannelAxis::kFirst) {
    const std::size_t c = dims.front();
    return {c, total / c, total / c, 1};
  }
  const std::size_t c = dims.back();
  return {c, total / c, 1, c};
}

/// Visits every entry in memory order as fn(flat index, channel).
template <typename Fn>
void for_each_entry(const NormLayout& lay, Fn&& fn) {
  if (lay.lstride == 1) {
    for (std::size_t c = 0; c < lay.channels; ++c)
      for (std::size_t l = 0; l < lay.length; ++l) fn(c * lay.cstride + l, c);
  } else {
    for (std::size_t l = 0; l < lay.length; ++l)
      for (std::size_t c = 0; c < lay.channels; ++c) fn(l * lay.lstride + c, c);
  }
}

/// Sums per-channel partials into per-group totals, channels in order.
inline std::vector<double> group_totals(const std::vector<double>& per_channel, std::size_t groups) {
  const std::size_t per = per_channel.size() / groups;
  std::vector<double> out(groups, 0.0);
  for (std::size_t c = 0; c < per_channel.size(); ++c) out[c / per] += per_channel[c];
  return out;
}

}  // namespace detail

/// Per group: subtract the mean and divide by sqrt(variance + eps) over all
/// (channel, position) entries of the group, then apply per-channel
/// gamma/beta.
template <typename Real>
Tensor<Real> group_norm(const Tensor<Real>& x, const GroupNormParams<Real>& p,
                        ChannelAxis axis = ChannelAxis::kFirst,
                        GroupNormCache<Real>* cache = nullptr) {
  const auto lay = detail::norm_layout(x.dims(), axis);
  p.validate(lay.channels);
  const std::size_t per = lay.channels / p.groups;
  const double count = double(per * lay.length);

  std::vector<double> part(lay.channels, 0.0);
  detail::for_each_entry(lay, [&](std::size_t i, std::size_t c) { part[c] += double(x[i]); });
  std::vector<double> mean = detail::group_totals(part, p.groups);
  for (auto& m : mean) m /= count;

  std::fill(part.begin(), part.end(), 0.0);
  detail::for_each_entry(lay, [&](std::size_t i, std::size_t c) {
    const double d = double(x[i]) - mean[c / per];
    part[c] += d * d;
  });
  std::vector<double> inv_std = detail::group_totals(part, p.groups);
  for (auto& v : inv_std) v = 1.0 / std::sqrt(v / count + p.eps);

  Tensor<Real> y(x.dims());
  Tensor<Real> xhat(x.dims());
  detail::for_each_entry(lay, [&](std::size_t i, std::size_t c) {
    const Real n = Real((double(x[i]) - mean[c / per]) * inv_std[c / per]);
    xhat[i] = n;
    y[i] = p.gamma[c] * n + p.beta[c];
  });
  if (cache) {
    cache->normalized = std::move(xhat);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

template <typename Real>
struct GroupNormGrads {
  Tensor<Real> input;
  Tensor<Real> gamma;
  Tensor<Real> beta;
};

template <typename Real>
GroupNormGrads<Real> group_norm_vjp(const GroupNormParams<Real>& p, const GroupNormCache<Real>& cache,
                                    const Tensor<Real>& gy, ChannelAxis axis = ChannelAxis::kFirst) {
  const auto& xhat = cache.normalized;
  require_shape(gy, xhat.dims(), "group_norm cotangent");
  const auto lay = detail::norm_layout(xhat.dims(), axis);
  const std::size_t per = lay.channels / p.groups;
  const double count = double(per * lay.length);

  std::vector<double> sg(lay.channels, 0.0), sgx(lay.channels, 0.0);
  detail::for_each_entry(lay, [&](std::size_t i, std::size_t c) {
    sg[c] += double(gy[i]);
    sgx[c] += double(gy[i]) * double(xhat[i]);
  });
  GroupNormGrads<Real> g{Tensor<Real>(xhat.dims()), Tensor<Real>({lay.channels}),
                         Tensor<Real>({lay.channels})};
  std::vector<double> wg(lay.channels), wgx(lay.channels);
  for (std::size_t c = 0; c < lay.channels; ++c) {
    g.beta[c] = Real(sg[c]);
    g.gamma[c] = Real(sgx[c]);
    wg[c] = double(p.gamma[c]) * sg[c];
    wgx[c] = double(p.gamma[c]) * sgx[c];
  }
  auto mean_g = detail::group_totals(wg, p.groups);
  auto mean_gx = detail::group_totals(wgx, p.groups);
  for (std::size_t k = 0; k < p.groups; ++k) {
    mean_g[k] /= count;
    mean_gx[k] /= count;
  }
  detail::for_each_entry(lay, [&](std::size_t i, std::size_t c) {
    const std::size_t k = c / per;
    const double dxhat = double(gy[i]) * double(p.gamma[c]);
    g.input[i] = Real(cache.inv_std[k] * (dxhat - mean_g[k] - double(xhat[i]) * mean_gx[k]));
  });
  return g;
}

}  // namespace avse::numerics
