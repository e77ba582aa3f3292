#pragma once

#include <cmath>
#include <limits>
#include <numbers>

#include "avse/metrics/sisdr.hpp"
#include "avse/tensor.hpp"

namespace avse::training {

inline constexpr double kLossStabilizer = 1e-8;

template <typename Real>
struct LossValue {
  double loss = 0.0;
  Tensor<Real> grad;  // d loss / d enhanced
};

/// Negative SI-SDR, uncapped, with `kLossStabilizer` added to the residual
/// energy. With s the projection of the centered estimate onto the centered
/// reference and n the remainder, the gradient is
///   -(20 / ln 10) * (s / |s|^2 - n / (|n|^2 + eps)).
template <typename Real>
LossValue<Real> si_sdr_loss(const Tensor<Real>& clean, const Tensor<Real>& enhanced) {
  const auto p = metrics::detail::project(clean, enhanced);
  LossValue<Real> out;
  out.grad = Tensor<Real>(enhanced.dims(), Real(0));
  if (!(p.target_energy > 0.0)) {
    out.loss = std::numeric_limits<double>::infinity();
    return out;
  }
  const double denom = p.residual_energy + kLossStabilizer;
  out.loss = -10.0 * std::log10(p.target_energy / denom);
  const double k = -20.0 / std::numbers::ln10;
  for (std::size_t i = 0; i < p.ref.size(); ++i) {
    const double s = p.alpha * p.ref[i];
    const double n = p.est[i] - s;
    out.grad[i] = Real(k * (s / p.target_energy - n / denom));
  }
  return out;
}

}  // namespace avse::training
