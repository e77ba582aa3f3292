#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"

#include "avse/error.hpp"
#include "avse/numerics/activation.hpp"

namespace avse::model {

/// Every architectural hyperparameter. Defaults are the full-size network
/// (about 4.6M parameters); `tiny()` and `small()` are the desk-scale
/// variants used for gradient checking and the overfit experiment.
struct ModelConfig {
  std::size_t sample_rate_hz = 16000;

  // Audio codec.
  std::size_t enc_channels = 256;
  std::size_t enc_kernel = 16;
  std::size_t enc_stride = 8;

  // Visual feature network.
  std::size_t visual_embed = 256;
  std::size_t frontend_channels = 16;
  std::vector<std::size_t> frontend_kernel{5, 7, 7};
  std::vector<std::size_t> frontend_stride{1, 2, 2};
  std::vector<std::size_t> frontend_padding{2, 3, 3};
  std::vector<std::size_t> trunk_channels{16, 32, 64, 128};
  std::size_t trunk_blocks = 2;
  std::size_t trunk_norm_groups = 4;
  std::size_t frame_height = 32;
  std::size_t frame_width = 32;

  // Fusion and separator.
  std::size_t fusion_channels = 256;
  std::size_t sep_units = 4;
  std::size_t sep_hidden = 128;
  std::size_t sep_norm_groups = 1;
  std::size_t chunk_len = 100;
  std::size_t chunk_hop = 50;
  numerics::Activation mask_activation = numerics::Activation::kSigmoid;
  double norm_eps = 1e-5;

  static ModelConfig full() { return {}; }

  /// Gradient-check scale: N=8, H=4, one unit, 4-frame chunks, 8x8 frames.
  static ModelConfig tiny() {
    ModelConfig c;
    c.enc_channels = 8;
    c.visual_embed = 8;
    c.frontend_channels = 4;
    c.trunk_channels = {4};
    c.trunk_blocks = 1;
    c.trunk_norm_groups = 2;
    c.frame_height = 8;
    c.frame_width = 8;
    c.fusion_channels = 8;
    c.sep_units = 1;
    c.sep_hidden = 4;
    c.sep_norm_groups = 1;
    c.chunk_len = 4;
    c.chunk_hop = 2;
    return c;
  }

  /// Overfit-experiment scale.
  static ModelConfig small() {
    ModelConfig c;
    c.enc_channels = 32;
    c.visual_embed = 16;
    c.frontend_channels = 4;
    c.trunk_channels = {8, 16};
    c.trunk_blocks = 1;
    c.trunk_norm_groups = 4;
    c.frame_height = 16;
    c.frame_width = 16;
    c.fusion_channels = 32;
    c.sep_units = 2;
    c.sep_hidden = 16;
    c.chunk_len = 20;
    c.chunk_hop = 10;
    return c;
  }

  /// Named presets accepted wherever a config file is expected.
  static bool preset(const std::string& name, ModelConfig& out) {
    if (name == "default" || name == "full") out = full();
    else if (name == "tiny") out = tiny();
    else if (name == "small") out = small();
    else return false;
    return true;
  }

  void validate() const {
    auto positive = [](std::size_t v, const char* what) {
      if (v == 0) throw ConfigError(std::string(what) + " must be >= 1");
    };
    positive(sample_rate_hz, "sample_rate_hz");
    positive(enc_channels, "enc_channels");
    positive(enc_kernel, "enc_kernel");
    positive(enc_stride, "enc_stride");
    positive(visual_embed, "visual_embed");
    positive(frontend_channels, "frontend_channels");
    positive(trunk_blocks, "trunk_blocks");
    positive(trunk_norm_groups, "trunk_norm_groups");
    positive(frame_height, "frame_height");
    positive(frame_width, "frame_width");
    positive(fusion_channels, "fusion_channels");
    positive(sep_hidden, "sep_hidden");
    positive(sep_norm_groups, "sep_norm_groups");
    positive(chunk_len, "chunk_len");
    if (enc_stride > enc_kernel) throw ConfigError("enc_stride must not exceed enc_kernel");
    if (chunk_len < 2 || chunk_hop != chunk_len / 2) {
      throw ConfigError("chunk_hop must equal chunk_len / 2 with chunk_len >= 2");
    }
    if (fusion_channels != enc_channels) throw ConfigError("fusion_channels must equal enc_channels");
    if (frontend_kernel.size() != 3 || frontend_stride.size() != 3 || frontend_padding.size() != 3) {
      throw ConfigError("frontend kernel/stride/padding need 3 extents");
    }
    for (int a = 0; a < 3; ++a) {
      if (frontend_kernel[a] == 0 || frontend_stride[a] == 0)
        throw ConfigError("frontend kernel and stride extents must be >= 1");
    }
    if (frontend_stride[0] != 1 || 2 * frontend_padding[0] + 1 != frontend_kernel[0]) {
      throw ConfigError("frontend must preserve the frame count (temporal stride 1, padding (k-1)/2)");
    }
    if (frame_height + 2 * frontend_padding[1] < frontend_kernel[1] ||
        frame_width + 2 * frontend_padding[2] < frontend_kernel[2]) {
      throw ConfigError("frames are smaller than the frontend kernel");
    }
    if (trunk_channels.empty()) throw ConfigError("trunk needs at least one stage");
    for (std::size_t c : trunk_channels) {
      if (c == 0 || c % trunk_norm_groups != 0)
        throw ConfigError("trunk_norm_groups must divide every trunk stage width");
    }
    if (fusion_channels % sep_norm_groups != 0)
      throw ConfigError("sep_norm_groups must divide fusion_channels");
    if (mask_activation != numerics::Activation::kSigmoid) {
      throw ConfigError("mask_activation must be sigmoid (mask entries are bounded to [0, 1])");
    }
    if (!(norm_eps > 0.0)) throw ConfigError("norm_eps must be positive");
  }

  std::size_t trunk_out_channels() const { return trunk_channels.back(); }
};

inline void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{
      {"sample_rate_hz", c.sample_rate_hz},
      {"enc_channels", c.enc_channels},
      {"enc_kernel", c.enc_kernel},
      {"enc_stride", c.enc_stride},
      {"visual_embed", c.visual_embed},
      {"frontend_channels", c.frontend_channels},
      {"frontend_kernel", c.frontend_kernel},
      {"frontend_stride", c.frontend_stride},
      {"frontend_padding", c.frontend_padding},
      {"trunk_channels", c.trunk_channels},
      {"trunk_blocks", c.trunk_blocks},
      {"trunk_norm_groups", c.trunk_norm_groups},
      {"frame_height", c.frame_height},
      {"frame_width", c.frame_width},
      {"fusion_channels", c.fusion_channels},
      {"sep_units", c.sep_units},
      {"sep_hidden", c.sep_hidden},
      {"sep_norm_groups", c.sep_norm_groups},
      {"chunk_len", c.chunk_len},
      {"chunk_hop", c.chunk_hop},
      {"mask_activation", numerics::to_string(c.mask_activation)},
      {"norm_eps", c.norm_eps},
  };
}

/// Missing keys keep their defaults; unknown keys are rejected.
inline void from_json(const nlohmann::json& j, ModelConfig& c) {
  if (!j.is_object()) throw SchemaError("model config must be a JSON object");
  nlohmann::json known;
  to_json(known, ModelConfig{});
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw SchemaError("unknown model config key '" + key + "'");
  }
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) j.at(key).get_to(field);
    };
    get("sample_rate_hz", c.sample_rate_hz);
    get("enc_channels", c.enc_channels);
    get("enc_kernel", c.enc_kernel);
    get("enc_stride", c.enc_stride);
    get("visual_embed", c.visual_embed);
    get("frontend_channels", c.frontend_channels);
    get("frontend_kernel", c.frontend_kernel);
    get("frontend_stride", c.frontend_stride);
    get("frontend_padding", c.frontend_padding);
    get("trunk_channels", c.trunk_channels);
    get("trunk_blocks", c.trunk_blocks);
    get("trunk_norm_groups", c.trunk_norm_groups);
    get("frame_height", c.frame_height);
    get("frame_width", c.frame_width);
    get("fusion_channels", c.fusion_channels);
    get("sep_units", c.sep_units);
    get("sep_hidden", c.sep_hidden);
    get("sep_norm_groups", c.sep_norm_groups);
    get("chunk_len", c.chunk_len);
    get("chunk_hop", c.chunk_hop);
    get("norm_eps", c.norm_eps);
    if (j.contains("mask_activation")) {
      c.mask_activation = numerics::activation_from_string(j.at("mask_activation").get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("model config: ") + e.what());
  }
}

inline bool operator==(const ModelConfig& a, const ModelConfig& b) {
  nlohmann::json ja = a, jb = b;
  return ja == jb;
}

}  // namespace avse::model
