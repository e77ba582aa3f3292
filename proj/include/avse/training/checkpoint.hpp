#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"

#include "avse/data/tensor_file.hpp"
#include "avse/model/config.hpp"
#include "avse/model/params.hpp"
#include "avse/training/adam.hpp"

// AVCK layout, all little-endian:
//   "AVCK" | version u32 | config length u32 | config JSON (UTF-8)
//   | tensor count u32 | per tensor, by name: name length u32, name, AVST block
//   | optimizer flag u8 | if set: step u64, lr/beta1/beta2/eps f64,
//     then per tensor (same order) the first- and second-moment AVST blocks

namespace avse::training {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  model::ModelConfig config;
  model::ModelParams<float> params;
  std::optional<AdamState> optimizer;

  bool operator==(const Checkpoint&) const = default;
};

inline data::Bytes encode_checkpoint(const Checkpoint& ck) {
  data::Bytes out;
  data::ByteWriter w(out);
  w.tag("AVCK");
  w.u32(kCheckpointVersion);
  const std::string cfg = nlohmann::json(ck.config).dump();
  w.u32(std::uint32_t(cfg.size()));
  w.raw(cfg.data(), cfg.size());
  w.u32(std::uint32_t(ck.params.tensors.size()));
  for (const auto& [name, t] : ck.params.tensors) {
    w.u32(std::uint32_t(name.size()));
    w.raw(name.data(), name.size());
    data::encode_tensor(out, t);
  }
  w.u8(ck.optimizer ? 1 : 0);
  if (ck.optimizer) {
    const auto& s = *ck.optimizer;
    w.u64(s.step);
    w.f64(s.lr);
    w.f64(s.beta1);
    w.f64(s.beta2);
    w.f64(s.eps);
    for (const auto& [name, t] : ck.params.tensors) {
      auto m = s.m.find(name), v = s.v.find(name);
      data::encode_tensor(out, m == s.m.end() ? Tensor<float>(t.dims(), 0.0f) : m->second);
      data::encode_tensor(out, v == s.v.end() ? Tensor<float>(t.dims(), 0.0f) : v->second);
    }
  }
  return out;
}

inline Checkpoint decode_checkpoint(const data::Bytes& bytes, const std::string& what = "checkpoint") {
  data::ByteReader r(bytes, what);
  if (r.tag() != "AVCK") throw CorruptFileError(what + ": bad magic");
  const auto version = r.u32();
  if (version != kCheckpointVersion)
    throw CorruptFileError(what + ": unsupported version " + std::to_string(version));
  Checkpoint ck;
  const std::string cfg = r.str(r.u32());
  try {
    ck.config = nlohmann::json::parse(cfg).get<model::ModelConfig>();
    ck.config.validate();
  } catch (const nlohmann::json::exception& e) {
    throw CorruptFileError(what + ": config record: " + e.what());
  } catch (const Error& e) {
    throw CorruptFileError(what + ": config record: " + e.what());
  }
  const auto count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = r.str(r.u32());
    auto t = data::decode_tensor(r, what + " tensor '" + name + "'", false);
    if (!ck.params.tensors.emplace(std::move(name), std::move(t)).second)
      throw CorruptFileError(what + ": duplicate tensor name");
  }
  try {
    ck.params.check_against(ck.config);
  } catch (const ShapeError& e) {
    throw CorruptFileError(what + ": " + e.what());
  }
  const auto has_opt = r.u8();
  if (has_opt > 1) throw CorruptFileError(what + ": bad optimizer flag");
  if (has_opt) {
    AdamState s;
    s.step = r.u64();
    s.lr = r.f64();
    s.beta1 = r.f64();
    s.beta2 = r.f64();
    s.eps = r.f64();
    for (const auto& [name, t] : ck.params.tensors) {
      auto m = data::decode_tensor(r, what + " moment '" + name + "'", false);
      auto v = data::decode_tensor(r, what + " moment '" + name + "'", false);
      if (m.dims() != t.dims() || v.dims() != t.dims())
        throw CorruptFileError(what + ": optimizer moment shape mismatch for '" + name + "'");
      s.m.emplace(name, std::move(m));
      s.v.emplace(name, std::move(v));
    }
    ck.optimizer = std::move(s);
  }
  if (!r.done()) throw CorruptFileError(what + ": trailing bytes");
  return ck;
}

inline void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  data::write_file(path, encode_checkpoint(ck));
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(data::read_file(path), path.string());
}

}  // namespace avse::training
