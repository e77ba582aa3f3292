#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <string>

#include "avse/rng.hpp"
#include "avse/tensor.hpp"

namespace avse::data {

struct Scene {
  std::string id;
  Tensor<float> target;      // [T]
  Tensor<float> interferer;  // [T']
  Tensor<float> frames;      // [F, 1, H, W]
  double snr_db = 0.0;
  std::size_t sample_rate_hz = 16000;
};

struct SynthOptions {
  std::size_t sample_rate_hz = 16000;
  std::size_t frame_height = 32;
  std::size_t frame_width = 32;
  double frame_rate = 25.0;
  double snr_lo_db = -5.0;
  double snr_hi_db = 10.0;
};

inline std::string scene_id(std::uint64_t seed) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "S%05llu", static_cast<unsigned long long>(seed % 100000));
  return buf;
}

/// Smooth syllable-rate envelope in [0, 1]: three sinusoids between 2 and
/// 6 Hz, mapped through ((1 + s) / 2)^2 so quiet gaps appear.
struct Envelope {
  double freq[3], phase[3], amp[3];

  explicit Envelope(Rng& rng) {
    for (int m = 0; m < 3; ++m) {
      freq[m] = rng.uniform(2.0, 6.0);
      phase[m] = rng.uniform(0.0, 2.0 * std::numbers::pi);
      amp[m] = rng.uniform(0.5, 1.0);
    }
  }

  double operator()(double t) const {
    double s = 0.0, norm = 0.0;
    for (int m = 0; m < 3; ++m) {
      s += amp[m] * std::sin(2.0 * std::numbers::pi * freq[m] * t + phase[m]);
      norm += amp[m];
    }
    const double u = 0.5 * (1.0 + s / norm);
    return u * u;
  }
};

/// Desk-scale scene: a harmonic "voice" under a syllable envelope, resonant
/// filtered noise as the interferer, and frames whose mean brightness
/// follows the envelope.
inline Scene synth_scene(std::uint64_t seed, double duration_s, const SynthOptions& o = {}) {
  if (!(duration_s >= 0.5)) throw ConfigError("synth_scene: duration must be at least 0.5 s");
  if (o.frame_height < 2 || o.frame_width < 2) throw ConfigError("synth_scene: frames must be at least 2x2");
  Rng rng(seed);
  const double fs = double(o.sample_rate_hz);
  const auto n = std::size_t(std::floor(duration_s * fs));

  const Envelope env(rng);
  const double f0 = rng.uniform(120.0, 250.0);
  const double harm_amp[3] = {1.0, 0.6, 0.35};
  double harm_phase[3];
  for (double& p : harm_phase) p = rng.uniform(0.0, 2.0 * std::numbers::pi);

  Tensor<float> target({n});
  std::vector<double> env_at(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = double(i) / fs;
    double h = 0.0;
    for (int k = 0; k < 3; ++k)
      h += harm_amp[k] * std::sin(2.0 * std::numbers::pi * f0 * (k + 1) * t + harm_phase[k]);
    env_at[i] = env(t);
    target[i] = float(0.25 * env_at[i] * h);
  }

  // Two-pole resonator driven by white noise.
  const double fc = rng.uniform(500.0, 3000.0);
  const double r = 0.9;
  const double a1 = 2.0 * r * std::cos(2.0 * std::numbers::pi * fc / fs), a2 = -r * r;
  std::vector<double> noise(n);
  double y1 = 0.0, y2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double y = rng.normal() + a1 * y1 + a2 * y2;
    noise[i] = y;
    y2 = y1;
    y1 = y;
  }
  const double target_rms = std::sqrt(dot(target, target) / double(n));
  double noise_sq = 0.0;
  for (double v : noise) noise_sq += v * v;
  const double scale = target_rms / std::sqrt(noise_sq / double(n));
  Tensor<float> interferer({n});
  for (std::size_t i = 0; i < n; ++i) interferer[i] = float(noise[i] * scale);

  const double snr = rng.uniform(o.snr_lo_db, o.snr_hi_db);

  const auto frames_n = std::size_t(std::floor(o.frame_rate * duration_s));
  const std::size_t h = o.frame_height, w = o.frame_width;
  Tensor<float> frames({frames_n, 1, h, w});
  for (std::size_t f = 0; f < frames_n; ++f) {
    const auto at = std::min(n - 1, std::size_t(std::llround(double(f) * fs / o.frame_rate)));
    const double e = env_at[at];
    for (std::size_t y = 0; y < h; ++y) {
      const double cy = std::cos(2.0 * std::numbers::pi * (double(y) + 0.5) / double(h));
      for (std::size_t x = 0; x < w; ++x) {
        const double cx = std::cos(2.0 * std::numbers::pi * (double(x) + 0.5) / double(w));
        frames.at(f, 0, y, x) = float(e * (1.0 + 0.5 * cy * cx));
      }
    }
  }
  return {scene_id(seed), std::move(target), std::move(interferer), std::move(frames), snr,
          o.sample_rate_hz};
}

/// Envelope of `synth_scene(seed, ...)` sampled at the frame times.
inline std::vector<double> synth_frame_envelope(std::uint64_t seed, double duration_s,
                                                const SynthOptions& o = {}) {
  Rng rng(seed);
  const Envelope env(rng);
  const double fs = double(o.sample_rate_hz);
  const auto n = std::size_t(std::floor(duration_s * fs));
  const auto frames_n = std::size_t(std::floor(o.frame_rate * duration_s));
  std::vector<double> out(frames_n);
  for (std::size_t f = 0; f < frames_n; ++f) {
    const auto at = std::min(n - 1, std::size_t(std::llround(double(f) * fs / o.frame_rate)));
    out[f] = env(double(at) / fs);
  }
  return out;
}

}  // namespace avse::data
