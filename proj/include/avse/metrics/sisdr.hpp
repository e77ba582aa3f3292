#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "avse/tensor.hpp"

namespace avse::metrics {

/// Reported ceiling for a (numerically) distortion-free estimate.
inline constexpr double kSiSdrCapDb = 60.0;

namespace detail {

template <typename Real>
std::vector<double> centered(const Tensor<Real>& x) {
  std::vector<double> out(x.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) mean += double(x[i]);
  mean /= double(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = double(x[i]) - mean;
  return out;
}

/// Mean-removed reference, estimate, projection scale and the two energies.
struct Projection {
  std::vector<double> ref;
  std::vector<double> est;
  double alpha = 0.0;
  double target_energy = 0.0;    // |alpha * ref|^2
  double residual_energy = 0.0;  // |est - alpha * ref|^2
};

template <typename Real>
Projection project(const Tensor<Real>& ref, const Tensor<Real>& est) {
  if (ref.size() != est.size() || ref.empty()) {
    throw ShapeError("si_sdr: reference has " + std::to_string(ref.size()) + " samples, estimate " +
                     std::to_string(est.size()));
  }
  Projection p;
  p.ref = centered(ref);
  p.est = centered(est);
  double rr = 0.0, er = 0.0;
  for (std::size_t i = 0; i < p.ref.size(); ++i) {
    rr += p.ref[i] * p.ref[i];
    er += p.est[i] * p.ref[i];
  }
  if (!(rr > 0.0)) throw DegenerateSignalError("si_sdr: reference has zero energy after mean removal");
  p.alpha = er / rr;
  for (std::size_t i = 0; i < p.ref.size(); ++i) {
    const double s = p.alpha * p.ref[i];
    const double n = p.est[i] - s;
    p.target_energy += s * s;
    p.residual_energy += n * n;
  }
  return p;
}

}  // namespace detail

/// Scale-invariant SDR in dB with mean removal. A residual below 1e-12 of
/// the projected target energy reports +60 dB; the mirror case (an estimate
/// with no component along the reference, including silence) reports -60.
template <typename Real>
double si_sdr(const Tensor<Real>& ref, const Tensor<Real>& est) {
  const auto p = detail::project(ref, est);
  if (p.target_energy <= 1e-12 * p.residual_energy) return -kSiSdrCapDb;
  if (p.residual_energy <= 1e-12 * p.target_energy) return kSiSdrCapDb;
  return 10.0 * std::log10(p.target_energy / p.residual_energy);
}

}  // namespace avse::metrics
