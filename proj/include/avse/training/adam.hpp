#pragma once

#include <cmath>
#include <map>
#include <string>

#include "avse/model/params.hpp"

namespace avse::training {

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t step = 0;
  std::map<std::string, Tensor<float>> m;
  std::map<std::string, Tensor<float>> v;

  bool operator==(const AdamState&) const = default;
};

using Gradients = std::map<std::string, Tensor<float>>;

/// Bias-corrected Adam update. Moments are created on first use; a
/// parameter without a gradient entry is treated as having a zero gradient.
inline void adam_step(model::ModelParams<float>& params, const Gradients& grads, AdamState& s) {
  for (const auto& [name, g] : grads) {
    const auto& p = params.at(name);
    require_shape(g, p.dims(), "adam gradient");
  }
  ++s.step;
  const double c1 = 1.0 - std::pow(s.beta1, double(s.step));
  const double c2 = 1.0 - std::pow(s.beta2, double(s.step));
  for (auto& [name, p] : params.tensors) {
    auto& m = s.m[name];
    auto& v = s.v[name];
    if (m.empty()) m = Tensor<float>(p.dims(), 0.0f);
    if (v.empty()) v = Tensor<float>(p.dims(), 0.0f);
    require_shape(m, p.dims(), "adam first moment");
    require_shape(v, p.dims(), "adam second moment");
    auto it = grads.find(name);
    const Tensor<float>* g = it == grads.end() ? nullptr : &it->second;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double gi = g ? double((*g)[i]) : 0.0;
      const double mi = s.beta1 * double(m[i]) + (1.0 - s.beta1) * gi;
      const double vi = s.beta2 * double(v[i]) + (1.0 - s.beta2) * gi * gi;
      m[i] = float(mi);
      v[i] = float(vi);
      p[i] = float(double(p[i]) - s.lr * (mi / c1) / (std::sqrt(vi / c2) + s.eps));
    }
  }
}

/// Rescales all gradients so their joint L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
inline double clip_global_norm(Gradients& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& [name, g] : grads) sq += dot(g, g);
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const float scale = float(max_norm / norm);
    for (auto& [name, g] : grads)
      for (auto& x : g.data()) x *= scale;
  }
  return norm;
}

}  // namespace avse::training
