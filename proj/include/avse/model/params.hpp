#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "avse/model/config.hpp"
#include "avse/numerics/conv.hpp"
#include "avse/numerics/lstm.hpp"
#include "avse/rng.hpp"
#include "avse/tensor.hpp"

namespace avse::model {

enum class InitKind {
  kUniform,     // U(-sqrt(1/fan_in), +sqrt(1/fan_in))
  kLstmBias,    // uniform, forget-gate block set to 1
  kOnes,
  kZeros,
};

struct ParamSpec {
  std::string name;
  Shape shape;
  InitKind init = InitKind::kUniform;
  std::size_t fan_in = 1;
};

// Layer geometry shared by the shape table and the forward pass.

inline numerics::ConvSpec encoder_spec(const ModelConfig& c) {
  return {1, c.enc_channels, {c.enc_kernel}, {c.enc_stride}, {0}, true};
}

inline numerics::ConvSpec decoder_spec(const ModelConfig& c) {
  return {c.enc_channels, 1, {c.enc_kernel}, {c.enc_stride}, {0}, true};
}

inline numerics::ConvSpec frontend_spec(const ModelConfig& c) {
  return {1, c.frontend_channels, c.frontend_kernel, c.frontend_stride, c.frontend_padding, true};
}

inline numerics::ConvSpec trunk_conv_spec(std::size_t in, std::size_t out, std::size_t stride) {
  return {in, out, {1, 3, 3}, {1, stride, stride}, {0, 1, 1}, false};
}

inline numerics::ConvSpec trunk_down_spec(std::size_t in, std::size_t out, std::size_t stride) {
  return {in, out, {1, 1, 1}, {1, stride, stride}, {0, 0, 0}, false};
}

inline numerics::ConvSpec pointwise_spec(std::size_t in, std::size_t out) {
  return {in, out, {1}, {1}, {0}, true};
}

/// One residual block of the visual trunk.
struct TrunkBlock {
  std::string prefix;
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t stride = 1;
  bool has_down = false;
};

inline std::vector<TrunkBlock> trunk_blocks(const ModelConfig& c) {
  std::vector<TrunkBlock> blocks;
  std::size_t in = c.frontend_channels;
  for (std::size_t s = 0; s < c.trunk_channels.size(); ++s) {
    for (std::size_t b = 0; b < c.trunk_blocks; ++b) {
      TrunkBlock blk;
      blk.prefix = "vfn.trunk." + std::to_string(s) + "." + std::to_string(b) + ".";
      blk.in = in;
      blk.out = c.trunk_channels[s];
      blk.stride = b == 0 ? 2 : 1;
      blk.has_down = blk.stride != 1 || blk.in != blk.out;
      blocks.push_back(blk);
      in = blk.out;
    }
  }
  return blocks;
}

inline std::string unit_prefix(std::size_t unit, const char* pass) {
  return "sep." + std::to_string(unit) + "." + pass + ".";
}

/// The complete, ordered (by name) table of learnable tensors for a config.
inline std::vector<ParamSpec> parameter_table(const ModelConfig& c) {
  c.validate();
  std::vector<ParamSpec> t;
  auto conv = [&t](const std::string& name, const numerics::ConvSpec& s, bool transposed = false) {
    const std::size_t taps = shape_size(s.kernel);
    const std::size_t fan_in = (transposed ? s.out_channels : s.in_channels) * taps;
    t.push_back({name + ".weight", transposed ? s.transposed_weight_shape() : s.weight_shape(),
                 InitKind::kUniform, fan_in});
    if (s.bias) t.push_back({name + ".bias", {s.out_channels}, InitKind::kUniform, fan_in});
  };
  auto norm = [&t](const std::string& name, std::size_t channels) {
    t.push_back({name + ".gamma", {channels}, InitKind::kOnes, 1});
    t.push_back({name + ".beta", {channels}, InitKind::kZeros, 1});
  };

  conv("encoder", encoder_spec(c));
  conv("decoder", decoder_spec(c), true);
  conv("vfn.frontend", frontend_spec(c));
  for (const auto& b : trunk_blocks(c)) {
    conv(b.prefix + "conv1", trunk_conv_spec(b.in, b.out, b.stride));
    norm(b.prefix + "norm1", b.out);
    conv(b.prefix + "conv2", trunk_conv_spec(b.out, b.out, 1));
    norm(b.prefix + "norm2", b.out);
    if (b.has_down) {
      conv(b.prefix + "down", trunk_down_spec(b.in, b.out, b.stride));
      norm(b.prefix + "down_norm", b.out);
    }
  }
  t.push_back({"vfn.proj.weight", {c.visual_embed, c.trunk_out_channels()}, InitKind::kUniform,
               c.trunk_out_channels()});
  t.push_back({"vfn.proj.bias", {c.visual_embed}, InitKind::kUniform, c.trunk_out_channels()});
  conv("fusion", pointwise_spec(c.enc_channels + c.visual_embed, c.fusion_channels));

  const std::size_t d = c.fusion_channels, h = c.sep_hidden;
  for (std::size_t r = 0; r < c.sep_units; ++r) {
    for (const char* pass : {"intra", "inter"}) {
      const std::string p = unit_prefix(r, pass);
      for (const char* dir : {"fwd", "bwd"}) {
        const std::string lp = p + "lstm." + dir;
        t.push_back({lp + ".weight", numerics::LstmParams<float>::weight_shape(d, h),
                     InitKind::kUniform, d + h});
        t.push_back({lp + ".bias", {4 * h}, InitKind::kLstmBias, d + h});
      }
      t.push_back({p + "proj.weight", {d, 2 * h}, InitKind::kUniform, 2 * h});
      t.push_back({p + "proj.bias", {d}, InitKind::kUniform, 2 * h});
      norm(p + "norm", d);
    }
  }
  conv("mask", pointwise_spec(c.fusion_channels, c.enc_channels));

  std::sort(t.begin(), t.end(), [](const ParamSpec& a, const ParamSpec& b) { return a.name < b.name; });
  return t;
}

inline std::size_t count_parameters(const ModelConfig& c) {
  std::size_t n = 0;
  for (const auto& p : parameter_table(c)) n += shape_size(p.shape);
  return n;
}

/// Named learnable tensors, kept in name order.
template <typename Real>
struct ModelParams {
  std::map<std::string, Tensor<Real>> tensors;

  const Tensor<Real>& at(const std::string& name) const {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw ConfigError("missing parameter '" + name + "'");
    return it->second;
  }
  Tensor<Real>& at(const std::string& name) {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw ConfigError("missing parameter '" + name + "'");
    return it->second;
  }

  std::size_t count() const {
    std::size_t n = 0;
    for (const auto& [name, t] : tensors) n += t.size();
    return n;
  }

  /// Throws ShapeError unless names and shapes match the table exactly.
  void check_against(const ModelConfig& c) const {
    const auto table = parameter_table(c);
    if (table.size() != tensors.size()) {
      throw ShapeError("parameter set has " + std::to_string(tensors.size()) +
                       " tensors, config expects " + std::to_string(table.size()));
    }
    for (const auto& spec : table) {
      auto it = tensors.find(spec.name);
      if (it == tensors.end()) throw ShapeError("missing parameter '" + spec.name + "'");
      if (it->second.dims() != spec.shape) {
        throw ShapeError("parameter '" + spec.name + "' has shape " +
                         shape_string(it->second.dims()) + ", config expects " +
                         shape_string(spec.shape));
      }
    }
  }

  template <typename Other>
  ModelParams<Other> cast() const {
    ModelParams<Other> out;
    for (const auto& [name, t] : tensors) out.tensors.emplace(name, t.template cast<Other>());
    return out;
  }

  friend bool operator==(const ModelParams& a, const ModelParams& b) { return a.tensors == b.tensors; }
};

/// Deterministic initialization: one generator, tensors drawn in name order.
template <typename Real>
ModelParams<Real> init_parameters(const ModelConfig& c, std::uint64_t seed) {
  Rng rng(seed);
  ModelParams<Real> p;
  for (const auto& spec : parameter_table(c)) {
    Tensor<Real> t(spec.shape);
    const double bound = std::sqrt(1.0 / double(spec.fan_in));
    switch (spec.init) {
      case InitKind::kUniform:
        for (auto& v : t.data()) v = Real(rng.uniform(-bound, bound));
        break;
      case InitKind::kLstmBias: {
        const std::size_t h = t.size() / 4;
        for (std::size_t i = 0; i < t.size(); ++i) {
          const double u = rng.uniform(-bound, bound);
          t[i] = (i >= h && i < 2 * h) ? Real(1) : Real(u);
        }
        break;
      }
      case InitKind::kOnes: t.fill(Real(1)); break;
      case InitKind::kZeros: break;
    }
    p.tensors.emplace(spec.name, std::move(t));
  }
  return p;
}

}  // namespace avse::model
