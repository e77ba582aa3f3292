#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "avse/model/network.hpp"
#include "avse/rng.hpp"
#include "avse/training/loss.hpp"

namespace avse::training {

struct ParamProbe {
  std::string name;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::vector<ParamProbe> probes;
  std::set<std::string> covered() const {
    std::set<std::string> out;
    for (const auto& p : probes) out.insert(p.name);
    return out;
  }
};

struct GradCheckOptions {
  std::size_t samples = 200;
  std::size_t wave_length = 64;
  std::size_t frames = 2;
  double step = 1e-5;
  double floor = 1e-6;  // denominator floor of the relative error
};

inline double relative_error(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// End-to-end check of enhance + si_sdr_loss in double precision: analytic
/// gradients against central differences on sampled parameter entries.
/// Every tensor contributes at least one probe; the rest are drawn
/// uniformly without replacement.
inline GradCheckResult grad_check(const model::ModelConfig& c, std::uint64_t seed,
                                  const GradCheckOptions& o = {}) {
  Rng rng(seed);
  auto params = model::init_parameters<double>(c, rng.next_u64());
  Tensor<double> wave({o.wave_length}), clean({o.wave_length});
  for (auto& v : wave.data()) v = 0.5 * rng.normal();
  for (auto& v : clean.data()) v = 0.5 * rng.normal();
  Tensor<double> frames({o.frames, 1, c.frame_height, c.frame_width});
  for (auto& v : frames.data()) v = rng.uniform();

  auto loss_of = [&](const model::ModelParams<double>& p) {
    return si_sdr_loss(clean, model::enhance(wave, frames, p, c)).loss;
  };

  ad::Graph<double> g(true);
  model::Network<double> net(g, c, params);
  auto out = net.enhance(g.constant(wave), g.constant(frames));
  g.backward(out, si_sdr_loss(clean, out->value).grad);

  std::vector<std::pair<std::string, std::size_t>> picks;
  std::set<std::pair<std::string, std::size_t>> seen;
  for (const auto& [name, t] : params.tensors) {
    std::pair<std::string, std::size_t> p{name, std::size_t(rng.below(t.size()))};
    seen.insert(p);
    picks.push_back(p);
  }
  std::vector<std::pair<std::string, std::size_t>> pool;
  for (const auto& [name, t] : params.tensors)
    for (std::size_t i = 0; i < t.size(); ++i)
      if (!seen.count({name, i})) pool.emplace_back(name, i);
  rng.shuffle(pool);
  for (std::size_t i = 0; picks.size() < o.samples && i < pool.size(); ++i) picks.push_back(pool[i]);

  GradCheckResult r;
  for (const auto& [name, idx] : picks) {
    const auto& grad = net.param(name)->grad;
    ParamProbe probe{name, idx, grad.empty() ? 0.0 : grad[idx], 0.0, 0.0};
    auto& x = params.at(name)[idx];
    const double saved = x;
    x = saved + o.step;
    const double up = loss_of(params);
    x = saved - o.step;
    const double down = loss_of(params);
    x = saved;
    probe.numeric = (up - down) / (2.0 * o.step);
    probe.rel_error = relative_error(probe.analytic, probe.numeric, o.floor);
    r.max_rel_error = std::max(r.max_rel_error, probe.rel_error);
    r.probes.push_back(probe);
  }
  return r;
}

}  // namespace avse::training
