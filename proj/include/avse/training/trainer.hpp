#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "avse/data/mixer.hpp"
#include "avse/data/scene.hpp"
#include "avse/metrics/sisdr.hpp"
#include "avse/model/network.hpp"
#include "avse/rng.hpp"
#include "avse/training/adam.hpp"
#include "avse/training/loss.hpp"

namespace avse::training {

/// FNV-1a of the scene id; fixes the interferer trim offset per scene.
inline std::uint64_t scene_mix_seed(const std::string& id) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : id) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline Tensor<float> scene_mixture(const data::Scene& s) {
  return data::mix_scene(s.target, s.interferer, s.snr_db,
                         data::MixOptions{s.sample_rate_hz, scene_mix_seed(s.id)});
}

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double mean_loss = 0.0;
  double mean_sisdr = 0.0;

  std::string json() const {
    nlohmann::ordered_json j;
    j["epoch"] = epoch;
    j["mean_loss"] = mean_loss;
    j["mean_sisdr"] = mean_sisdr;
    return j.dump();
  }
};

struct TrainOptions {
  std::size_t epochs = 1;
  std::uint64_t seed = 0;  // initialization and scene order
  double lr = 1e-3;
  double clip_norm = 5.0;
  std::function<void(const EpochLog&)> on_epoch;
};

struct TrainResult {
  model::ModelParams<float> params;
  AdamState optimizer;
  std::vector<EpochLog> log;
};

struct StepResult {
  double loss = 0.0;
  double sisdr_db = 0.0;
  Tensor<float> enhanced;
  Gradients grads;
};

/// Forward, loss and backward for one scene. Gradients are zero-filled for
/// parameters the loss does not reach.
inline StepResult train_step(const model::ModelConfig& c, const model::ModelParams<float>& params,
                             const Tensor<float>& mixture, const Tensor<float>& frames,
                             const Tensor<float>& target) {
  ad::Graph<float> g(true);
  model::Network<float> net(g, c, params);
  auto out = net.enhance(g.constant(mixture), g.constant(frames));
  auto lv = si_sdr_loss(target, out->value);
  StepResult r;
  r.loss = lv.loss;
  if (std::isfinite(lv.loss)) {
    r.sisdr_db = metrics::si_sdr(target, out->value);
    g.backward(out, lv.grad);
    for (const auto& [name, v] : net.parameters())
      r.grads.emplace(name, v->grad.empty() ? Tensor<float>(v->value.dims(), 0.0f) : v->grad);
  }
  r.enhanced = std::move(out->value);
  return r;
}

/// Batch-size-one Adam training with a fresh seeded shuffle every epoch.
inline TrainResult train(const model::ModelConfig& c, const std::vector<data::Scene>& scenes,
                         const TrainOptions& o,
                         std::optional<model::ModelParams<float>> init = std::nullopt) {
  if (scenes.empty()) throw EmptySequenceError("train: no scenes");
  c.validate();
  TrainResult r;
  r.params = init ? std::move(*init) : model::init_parameters<float>(c, o.seed);
  r.optimizer.lr = o.lr;
  std::vector<Tensor<float>> mixtures;
  for (const auto& s : scenes) mixtures.push_back(scene_mixture(s));

  Rng order_rng(o.seed ^ 0x5eed0fda7aULL);
  std::vector<std::size_t> order(scenes.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t epoch = 1; epoch <= o.epochs; ++epoch) {
    order_rng.shuffle(order);
    double loss_sum = 0.0, sisdr_sum = 0.0;
    for (std::size_t k = 0; k < order.size(); ++k) {
      const auto& s = scenes[order[k]];
      auto step = train_step(c, r.params, mixtures[order[k]], s.frames, s.target);
      if (!std::isfinite(step.loss)) {
        throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) + ", step " +
                           std::to_string(k + 1) + " (scene " + s.id + ")");
      }
      clip_global_norm(step.grads, o.clip_norm);
      adam_step(r.params, step.grads, r.optimizer);
      loss_sum += step.loss;
      sisdr_sum += step.sisdr_db;
    }
    EpochLog e{epoch, loss_sum / double(scenes.size()), sisdr_sum / double(scenes.size())};
    r.log.push_back(e);
    if (o.on_epoch) o.on_epoch(e);
  }
  return r;
}

}  // namespace avse::training
