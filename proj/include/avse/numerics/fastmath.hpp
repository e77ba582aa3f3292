#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <type_traits>

// Branch-free float exponential (Cephes polynomial, about 2 ulp) that the
// compiler can vectorize, and the gate nonlinearities built on it. Double
// precision keeps the library functions so gradient checks see exact math.

namespace avse::numerics {

inline float exp_vec(float x) {
  x = std::clamp(x, -87.3f, 88.7f);
  const float n = std::floor(x * 1.44269504088896341f + 0.5f);
  float r = x - n * 0.693359375f;
  r = r - n * -2.12194440e-4f;
  const float r2 = r * r;
  float p = 1.9875691500e-4f;
  p = p * r + 1.3981999507e-3f;
  p = p * r + 8.3334519073e-3f;
  p = p * r + 4.1665795894e-2f;
  p = p * r + 1.6666665459e-1f;
  p = p * r + 5.0000001201e-1f;
  p = p * r2 + r + 1.0f;
  const auto bits = std::uint32_t(std::int32_t(n) + 127) << 23;
  return p * std::bit_cast<float>(bits);
}

template <typename Real>
Real tanh_gate(Real v) {
  if constexpr (std::is_same_v<Real, float>) return 2.0f / (1.0f + exp_vec(-2.0f * v)) - 1.0f;
  else return std::tanh(v);
}

template <typename Real>
void sigmoid_inplace(Real* x, std::size_t n) {
  if constexpr (std::is_same_v<Real, float>) {
    for (std::size_t i = 0; i < n; ++i) x[i] = 1.0f / (1.0f + exp_vec(-x[i]));
  } else {
    for (std::size_t i = 0; i < n; ++i)
      x[i] = x[i] >= Real(0) ? Real(1) / (Real(1) + std::exp(-x[i])) : std::exp(x[i]) / (Real(1) + std::exp(x[i]));
  }
}

template <typename Real>
void tanh_inplace(Real* x, std::size_t n) {
  if constexpr (std::is_same_v<Real, float>) {
    for (std::size_t i = 0; i < n; ++i) x[i] = tanh_gate(x[i]);
  } else {
    for (std::size_t i = 0; i < n; ++i) x[i] = std::tanh(x[i]);
  }
}

}  // namespace avse::numerics
