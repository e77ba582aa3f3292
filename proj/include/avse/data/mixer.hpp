#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "avse/rng.hpp"
#include "avse/tensor.hpp"

namespace avse::data {

struct MixOptions {
  std::size_t sample_rate_hz = 16000;
  std::uint64_t seed = 0;  // picks the trim offset of a longer interferer
  double crossfade_s = 0.010;
};

/// Brings `interferer` to exactly `length` samples. Shorter signals repeat
/// with a linear crossfade at every seam; longer ones are cut from a seeded
/// offset.
template <typename Real>
Tensor<Real> fit_interferer(const Tensor<Real>& interferer, std::size_t length, const MixOptions& o) {
  require_rank(interferer, 1, "interferer");
  const std::size_t n = interferer.size();
  if (n == length) return interferer;
  std::vector<Real> out;
  out.reserve(length);
  const auto src = interferer.data();
  if (n > length) {
    Rng rng(o.seed);
    const std::size_t off = std::size_t(rng.below(n - length + 1));
    out.assign(src.begin() + std::ptrdiff_t(off), src.begin() + std::ptrdiff_t(off + length));
    return Tensor<Real>({length}, std::move(out));
  }
  const std::size_t fade =
      std::min<std::size_t>(std::size_t(std::lround(o.crossfade_s * double(o.sample_rate_hz))), n / 2);
  out.assign(src.begin(), src.end());
  while (out.size() < length) {
    const std::size_t seam = out.size() - fade;
    for (std::size_t j = 0; j < fade; ++j) {
      const Real w = Real((double(j) + 0.5) / double(fade));
      out[seam + j] = out[seam + j] * (Real(1) - w) + src[j] * w;
    }
    out.insert(out.end(), src.begin() + std::ptrdiff_t(fade), src.end());
  }
  out.resize(length);
  return Tensor<Real>({length}, std::move(out));
}

template <typename Real>
double mean_power(const Tensor<Real>& x) {
  return dot(x, x) / double(x.size());
}

/// Gain that puts `interferer` at `snr_db` below `target`, from mean powers.
template <typename Real>
double snr_gain(const Tensor<Real>& target, const Tensor<Real>& interferer, double snr_db) {
  const double pt = mean_power(target), pi = mean_power(interferer);
  if (!(pt > 0.0)) throw DegenerateSignalError("mix_scene: target has zero energy");
  if (!(pi > 0.0)) throw DegenerateSignalError("mix_scene: interferer has zero energy");
  if (!std::isfinite(snr_db)) throw ConfigError("mix_scene: snr_db must be finite");
  return std::sqrt(pt / (pi * std::pow(10.0, snr_db / 10.0)));
}

/// target + g * interferer, with the interferer fitted to the target length.
template <typename Real>
Tensor<Real> mix_scene(const Tensor<Real>& target, const Tensor<Real>& interferer, double snr_db,
                       const MixOptions& o = {}) {
  require_rank(target, 1, "target");
  const Tensor<Real> fitted = fit_interferer(interferer, target.size(), o);
  const Real g = Real(snr_gain(target, fitted, snr_db));
  Tensor<Real> out = target;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += g * fitted[i];
  return out;
}

}  // namespace avse::data
