#pragma once

#include <map>
#include <string>

#include "avse/autodiff.hpp"
#include "avse/model/config.hpp"
#include "avse/model/params.hpp"

namespace avse::model {

/// Length the waveform is right-padded to so that the decoder output covers
/// every input sample: K + ceil((T - K) / S) * S.
inline std::size_t padded_length(std::size_t t, const ModelConfig& c) {
  if (t < c.enc_kernel) {
    throw InputTooShortError("waveform of " + std::to_string(t) + " samples is shorter than the " +
                             std::to_string(c.enc_kernel) + "-sample encoder kernel");
  }
  const std::size_t hops = (t - c.enc_kernel + c.enc_stride - 1) / c.enc_stride;
  return c.enc_kernel + hops * c.enc_stride;
}

/// The network bound to one graph. Parameters enter the graph once (as
/// trainable leaves when the graph records, constants otherwise) and each
/// stage below is one block of the architecture.
template <typename Real>
class Network {
 public:
  using Var = ad::Var<Real>;

  Network(ad::Graph<Real>& graph, const ModelConfig& config, const ModelParams<Real>& params)
      : g_(graph), c_(config) {
    c_.validate();
    params.check_against(c_);
    for (const auto& [name, t] : params.tensors) vars_.emplace(name, g_.parameter(t));
  }

  const std::map<std::string, Var>& parameters() const { return vars_; }
  const Var& param(const std::string& name) const {
    auto it = vars_.find(name);
    if (it == vars_.end()) throw ConfigError("missing parameter '" + name + "'");
    return it->second;
  }

  /// wave [T] -> ReLU(conv1d) [N, T_a].
  Var encode(const Var& wave) {
    require_rank(wave->value, 1, "encode_audio input");
    if (wave->value.size() < c_.enc_kernel) {
      throw InputTooShortError("waveform shorter than the encoder kernel");
    }
    auto x = ad::reshape(g_, wave, {1, wave->value.size()});
    auto y = ad::conv1d(g_, x, param("encoder.weight"), param("encoder.bias"), encoder_spec(c_));
    return ad::activation(g_, numerics::Activation::kRelu, y);
  }

  /// frames [F, 1, H, W] -> [F, D_v].
  Var visual(const Var& frames) {
    const auto& f = frames->value;
    if (f.empty()) throw EmptySequenceError("visual_forward: no frames");
    require_rank(f, 4, "visual_forward frames");
    if (f.dim(1) != 1) throw ShapeError("visual_forward: frames must be single-channel");
    auto x = ad::reshape(g_, frames, {1, f.dim(0), f.dim(2), f.dim(3)});
    x = ad::conv3d(g_, x, param("vfn.frontend.weight"), param("vfn.frontend.bias"),
                   frontend_spec(c_));
    x = ad::activation(g_, numerics::Activation::kRelu, x);
    for (const auto& b : trunk_blocks(c_)) x = residual_block(x, b);
    auto pooled = ad::spatial_mean(g_, x);
    return ad::linear(g_, pooled, param("vfn.proj.weight"), param("vfn.proj.bias"));
  }

  /// Aligns visual embeddings to the audio frame rate and mixes both
  /// streams: [N, T_a] + [F, D_v] -> [fusion_channels, T_a].
  Var fuse(const Var& audio, const Var& embed) {
    require_rank(audio->value, 2, "fuse audio");
    require_rank(embed->value, 2, "fuse visual");
    if (audio->value.dim(0) != c_.enc_channels || embed->value.dim(1) != c_.visual_embed) {
      throw ShapeError("fuse: feature widths do not match the config");
    }
    const std::size_t t_a = audio->value.dim(1);
    auto v = ad::resize_linear_time(g_, embed, t_a);
    v = ad::transpose2d(g_, v);
    auto joint = ad::concat_rows(g_, audio, v);
    auto y = ad::conv1d(g_, joint, param("fusion.weight"), param("fusion.bias"),
                        pointwise_spec(c_.enc_channels + c_.visual_embed, c_.fusion_channels));
    return ad::activation(g_, numerics::Activation::kRelu, y);
  }

  /// Dual-path separator: [C, T_a] -> mask [N, T_a].
  Var separate(const Var& fused) {
    require_rank(fused->value, 2, "separator input");
    if (fused->value.dim(0) != c_.fusion_channels) throw ShapeError("separator: channel mismatch");
    const auto plan = numerics::ChunkPlan::make(fused->value.dim(1), c_.chunk_len, c_.chunk_hop);
    auto chunks = ad::segment(g_, fused, plan);  // [Q, P, C]
    for (std::size_t r = 0; r < c_.sep_units; ++r) {
      chunks = dual_path_pass(chunks, unit_prefix(r, "intra"));  // along P
      auto across = ad::swap_leading(g_, chunks);                // [P, Q, C]
      across = dual_path_pass(across, unit_prefix(r, "inter"));  // along Q
      chunks = ad::swap_leading(g_, across);
    }
    auto merged = ad::overlap_add(g_, chunks, plan);
    auto logits = ad::conv1d(g_, merged, param("mask.weight"), param("mask.bias"),
                             pointwise_spec(c_.fusion_channels, c_.enc_channels));
    return ad::activation(g_, c_.mask_activation, logits);
  }

  Var apply_mask(const Var& audio, const Var& mask) { return ad::mul(g_, audio, mask); }

  /// [N, T_a] -> [(T_a - 1) * S + K].
  Var decode(const Var& masked) {
    auto y = ad::conv_transpose1d(g_, masked, param("decoder.weight"), param("decoder.bias"),
                                  decoder_spec(c_));
    return ad::reshape(g_, y, {y->value.dim(1)});
  }

  /// Full pipeline; output has exactly the input length.
  Var enhance(const Var& wave, const Var& frames) {
    require_rank(wave->value, 1, "enhance input");
    const std::size_t t = wave->value.size();
    auto padded = ad::fit_length(g_, wave, padded_length(t, c_));
    auto audio = encode(padded);
    auto mask = separate(fuse(audio, visual(frames)));
    auto out = decode(apply_mask(audio, mask));
    return ad::fit_length(g_, out, t);
  }

 private:
  Var residual_block(const Var& x, const TrunkBlock& b) {
    const double eps = c_.norm_eps;
    const std::size_t groups = c_.trunk_norm_groups;
    const auto axis = numerics::ChannelAxis::kFirst;
    auto h = ad::conv3d(g_, x, param(b.prefix + "conv1.weight"), Var{},
                        trunk_conv_spec(b.in, b.out, b.stride));
    h = ad::group_norm(g_, h, param(b.prefix + "norm1.gamma"), param(b.prefix + "norm1.beta"),
                       groups, eps, axis);
    h = ad::activation(g_, numerics::Activation::kRelu, h);
    h = ad::conv3d(g_, h, param(b.prefix + "conv2.weight"), Var{},
                   trunk_conv_spec(b.out, b.out, 1));
    h = ad::group_norm(g_, h, param(b.prefix + "norm2.gamma"), param(b.prefix + "norm2.beta"),
                       groups, eps, axis);
    Var shortcut = x;
    if (b.has_down) {
      shortcut = ad::conv3d(g_, x, param(b.prefix + "down.weight"), Var{},
                            trunk_down_spec(b.in, b.out, b.stride));
      shortcut = ad::group_norm(g_, shortcut, param(b.prefix + "down_norm.gamma"),
                                param(b.prefix + "down_norm.beta"), groups, eps, axis);
    }
    return ad::activation(g_, numerics::Activation::kRelu, ad::add(g_, h, shortcut));
  }

  /// x [B, L, C]: BiLSTM along L, project 2H -> C, group-normalize, add
  /// back the input.
  Var dual_path_pass(const Var& x, const std::string& p) {
    auto h = ad::bilstm(g_, x, param(p + "lstm.fwd.weight"), param(p + "lstm.fwd.bias"),
                        param(p + "lstm.bwd.weight"), param(p + "lstm.bwd.bias"));
    h = ad::linear(g_, h, param(p + "proj.weight"), param(p + "proj.bias"));
    h = ad::group_norm(g_, h, param(p + "norm.gamma"), param(p + "norm.beta"), c_.sep_norm_groups,
                       c_.norm_eps, numerics::ChannelAxis::kLast);
    return ad::add(g_, x, h);
  }

  ad::Graph<Real>& g_;
  ModelConfig c_;
  std::map<std::string, Var> vars_;
};

// ---------------------------------------------------------------------------
// Value-level entry points (no gradient recording).

template <typename Real>
Tensor<Real> encode_audio(const Tensor<Real>& wave, const ModelParams<Real>& p, const ModelConfig& c) {
  ad::Graph<Real> g(false);
  Network<Real> net(g, c, p);
  return net.encode(g.constant(wave))->value;
}

template <typename Real>
Tensor<Real> visual_forward(const Tensor<Real>& frames, const ModelParams<Real>& p,
                            const ModelConfig& c) {
  ad::Graph<Real> g(false);
  Network<Real> net(g, c, p);
  return net.visual(g.constant(frames))->value;
}

template <typename Real>
Tensor<Real> fuse(const Tensor<Real>& audio, const Tensor<Real>& embed, const ModelParams<Real>& p,
                  const ModelConfig& c) {
  ad::Graph<Real> g(false);
  Network<Real> net(g, c, p);
  return net.fuse(g.constant(audio), g.constant(embed))->value;
}

template <typename Real>
Tensor<Real> separator_forward(const Tensor<Real>& fused, const ModelParams<Real>& p,
                               const ModelConfig& c) {
  ad::Graph<Real> g(false);
  Network<Real> net(g, c, p);
  return net.separate(g.constant(fused))->value;
}

template <typename Real>
Tensor<Real> apply_mask(const Tensor<Real>& audio, const Tensor<Real>& mask) {
  require_shape(mask, audio.dims(), "apply_mask");
  Tensor<Real> y = audio;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= mask[i];
  return y;
}

template <typename Real>
Tensor<Real> decode_audio(const Tensor<Real>& masked, const ModelParams<Real>& p,
                          const ModelConfig& c) {
  ad::Graph<Real> g(false);
  Network<Real> net(g, c, p);
  return net.decode(g.constant(masked))->value;
}

template <typename Real>
Tensor<Real> enhance(const Tensor<Real>& wave, const Tensor<Real>& frames,
                     const ModelParams<Real>& p, const ModelConfig& c) {
  ad::Graph<Real> g(false);
  Network<Real> net(g, c, p);
  return net.enhance(g.constant(wave), g.constant(frames))->value;
}

}  // namespace avse::model
