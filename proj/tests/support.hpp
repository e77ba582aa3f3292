#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <string>

#include "avse/rng.hpp"
#include "avse/tensor.hpp"

namespace avse::test {

template <typename Real = double>
Tensor<Real> random_tensor(Rng& rng, Shape dims, double scale = 1.0) {
  Tensor<Real> t(std::move(dims));
  for (auto& v : t.data()) v = Real(scale * rng.normal());
  return t;
}

inline double rel_error(double a, double b, double floor = 1e-8) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Largest relative error between `analytic` and the central difference of
/// `loss` with respect to every entry of `x`.
inline double fd_max_error(Tensor<double>& x, const Tensor<double>& analytic,
                           const std::function<double()>& loss, double step = 1e-5,
                           double floor = 1e-6) {
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + step;
    const double up = loss();
    x[i] = saved - step;
    const double down = loss();
    x[i] = saved;
    worst = std::max(worst, rel_error(analytic[i], (up - down) / (2.0 * step), floor));
  }
  return worst;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("avse_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace avse::test
