#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "avse/data/scene.hpp"
#include "avse/data/tensor_file.hpp"
#include "avse/data/wav.hpp"

namespace avse::data {

struct ManifestEntry {
  std::string id;
  std::filesystem::path target_path;
  std::filesystem::path interferer_path;
  std::filesystem::path frames_path;
  double snr_db = 0.0;

  bool operator==(const ManifestEntry&) const = default;
};

/// One JSON object per line; blank lines are skipped. Relative paths are
/// resolved against the manifest's directory.
inline std::vector<ManifestEntry> parse_manifest(std::istream& in, const std::filesystem::path& base,
                                                 const std::string& name = "manifest") {
  std::vector<ManifestEntry> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = name + ":" + std::to_string(lineno);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(where + ": malformed JSON (" + e.what() + ")");
    }
    if (!j.is_object()) throw SchemaError(where + ": entry is not an object");
    auto text = [&](const char* key) {
      if (!j.contains(key)) throw SchemaError(where + ": missing field '" + key + "'");
      if (!j[key].is_string() || j[key].get<std::string>().empty())
        throw SchemaError(where + ": field '" + key + "' must be a non-empty string");
      return j[key].get<std::string>();
    };
    auto path = [&](const char* key) {
      std::filesystem::path p = text(key);
      return p.is_relative() ? base / p : p;
    };
    ManifestEntry e;
    e.id = text("id");
    e.target_path = path("target_path");
    e.interferer_path = path("interferer_path");
    e.frames_path = path("frames_path");
    if (!j.contains("snr_db")) throw SchemaError(where + ": missing field 'snr_db'");
    if (!j["snr_db"].is_number() || !std::isfinite(j["snr_db"].get<double>()))
      throw SchemaError(where + ": field 'snr_db' must be a finite number");
    e.snr_db = j["snr_db"].get<double>();
    out.push_back(std::move(e));
  }
  return out;
}

inline std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
  return parse_manifest(in, path.parent_path(), path.string());
}

inline std::string manifest_line(const ManifestEntry& e) {
  nlohmann::ordered_json j;
  j["id"] = e.id;
  j["target_path"] = e.target_path.generic_string();
  j["interferer_path"] = e.interferer_path.generic_string();
  j["frames_path"] = e.frames_path.generic_string();
  j["snr_db"] = e.snr_db;
  return j.dump();
}

inline void save_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open manifest '" + path.string() + "' for writing");
  for (const auto& e : entries) out << manifest_line(e) << '\n';
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

inline Scene load_scene(const ManifestEntry& e) {
  Wave target = load_wav(e.target_path);
  Wave interferer = load_wav(e.interferer_path);
  if (target.sample_rate_hz != interferer.sample_rate_hz) {
    throw SchemaError("scene " + e.id + ": target at " + std::to_string(target.sample_rate_hz) +
                      " Hz, interferer at " + std::to_string(interferer.sample_rate_hz) + " Hz");
  }
  Tensor<float> frames = read_tensor(e.frames_path);
  if (frames.rank() != 4 || frames.dim(1) != 1)
    throw ShapeError("scene " + e.id + ": frames must be [F, 1, H, W], got " + shape_string(frames.dims()));
  return {e.id, std::move(target.samples), std::move(interferer.samples), std::move(frames), e.snr_db,
          target.sample_rate_hz};
}

/// Writes `<id>_target.wav`, `<id>_interferer.wav` and `<id>_frames.avst`
/// under `dir` and returns the entry with paths relative to `dir`.
inline ManifestEntry save_scene(const std::filesystem::path& dir, const Scene& s) {
  ManifestEntry e{s.id, s.id + "_target.wav", s.id + "_interferer.wav", s.id + "_frames.avst", s.snr_db};
  save_wav(dir / e.target_path, s.target, s.sample_rate_hz);
  save_wav(dir / e.interferer_path, s.interferer, s.sample_rate_hz);
  write_tensor(dir / e.frames_path, s.frames);
  return e;
}

}  // namespace avse::data
