#pragma once

#include <cmath>
#include <string>

#include "avse/tensor.hpp"

namespace avse::numerics {

enum class Activation { kRelu, kSigmoid, kTanh };

inline const char* to_string(Activation a) {
  switch (a) {
    case Activation::kRelu: return "relu";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kTanh: return "tanh";
  }
  return "?";
}

inline Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "sigmoid") return Activation::kSigmoid;
  if (s == "tanh") return Activation::kTanh;
  throw ConfigError("unknown activation '" + s + "'");
}

template <typename Real>
inline Real sigmoid(Real v) {
  // Split on sign so exp never overflows.
  if (v >= Real(0)) return Real(1) / (Real(1) + std::exp(-v));
  const Real e = std::exp(v);
  return e / (Real(1) + e);
}

template <typename Real>
Tensor<Real> activation(Activation kind, const Tensor<Real>& x) {
  Tensor<Real> y = x;
  Real* p = y.ptr();
  const std::size_t n = y.size();
  switch (kind) {
    case Activation::kRelu:
      for (std::size_t i = 0; i < n; ++i) p[i] = p[i] > Real(0) ? p[i] : Real(0);
      break;
    case Activation::kSigmoid:
      for (std::size_t i = 0; i < n; ++i) p[i] = sigmoid(p[i]);
      break;
    case Activation::kTanh:
      for (std::size_t i = 0; i < n; ++i) p[i] = std::tanh(p[i]);
      break;
  }
  return y;
}

/// Cotangent of the input given the forward output `y` (all three
/// derivatives are expressible in the output).
template <typename Real>
Tensor<Real> activation_vjp(Activation kind, const Tensor<Real>& y, const Tensor<Real>& gy) {
  require_shape(gy, y.dims(), "activation cotangent");
  Tensor<Real> gx(y.dims());
  const std::size_t n = y.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Real v = y[i];
    switch (kind) {
      case Activation::kRelu: gx[i] = v > Real(0) ? gy[i] : Real(0); break;
      case Activation::kSigmoid: gx[i] = gy[i] * v * (Real(1) - v); break;
      case Activation::kTanh: gx[i] = gy[i] * (Real(1) - v * v); break;
    }
  }
  return gx;
}

}  // namespace avse::numerics
