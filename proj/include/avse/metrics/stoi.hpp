#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "avse/metrics/fft.hpp"
#include "avse/metrics/resample.hpp"
#include "avse/tensor.hpp"

// Short-time objective intelligibility, classic formulation:
// 10 kHz analysis, 256-sample Hann frames with 50% overlap, 512-point
// spectra, 15 one-third-octave bands from 150 Hz, 30-frame (384 ms)
// sliding segments, silent frames more than 40 dB below the loudest
// reference frame removed, and a -15 dB lower bound on the per-band
// signal-to-distortion ratio.

namespace avse::metrics {

namespace stoi_constants {
inline constexpr double kSampleRate = 10000.0;
inline constexpr std::size_t kFrameLen = 256;
inline constexpr std::size_t kHop = 128;
inline constexpr std::size_t kFftSize = 512;
inline constexpr std::size_t kBands = 15;
inline constexpr double kMinFreq = 150.0;
inline constexpr std::size_t kSegmentFrames = 30;
inline constexpr double kBetaDb = -15.0;
inline constexpr double kDynRangeDb = 40.0;
inline constexpr double kEps = std::numeric_limits<double>::epsilon();
}  // namespace stoi_constants

/// One-third-octave band layout on the 512-point grid at 10 kHz.
struct BandDefinition {
  std::vector<double> center_hz;
  std::vector<std::size_t> bin_lo;  // inclusive
  std::vector<std::size_t> bin_hi;  // exclusive

  static BandDefinition standard() {
    using namespace stoi_constants;
    BandDefinition b;
    const std::size_t bins = kFftSize / 2 + 1;
    auto nearest_bin = [&](double hz) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < bins; ++k) {
        const double f = double(k) * kSampleRate / double(kFftSize);
        const double d = (f - hz) * (f - hz);
        if (d < best_d) {
          best_d = d;
          best = k;
        }
      }
      return best;
    };
    for (std::size_t k = 0; k < kBands; ++k) {
      const double kk = double(k);
      b.center_hz.push_back(kMinFreq * std::pow(2.0, kk / 3.0));
      b.bin_lo.push_back(nearest_bin(kMinFreq * std::pow(2.0, (2.0 * kk - 1.0) / 6.0)));
      b.bin_hi.push_back(nearest_bin(kMinFreq * std::pow(2.0, (2.0 * kk + 1.0) / 6.0)));
    }
    return b;
  }
};

namespace detail {

inline const std::vector<double>& stoi_window() {
  // Hann of length N + 2 with both zero endpoints dropped.
  static const std::vector<double> w = [] {
    const std::size_t n = stoi_constants::kFrameLen;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
      out[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * double(i + 1) / double(n + 1));
    return out;
  }();
  return w;
}

inline std::size_t frame_count(std::size_t length) {
  using namespace stoi_constants;
  return length > kFrameLen ? (length - kFrameLen + kHop - 1) / kHop : 0;
}

inline std::vector<double> windowed_frame(const std::vector<double>& x, std::size_t start) {
  const auto& w = stoi_window();
  std::vector<double> f(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) f[i] = w[i] * x[start + i];
  return f;
}

}  // namespace detail

/// Which 256/128 frames of a 10 kHz reference lie within 40 dB of the
/// loudest one. Only the reference decides.
inline std::vector<bool> speech_frame_mask(const std::vector<double>& ref10k) {
  using namespace stoi_constants;
  const std::size_t frames = detail::frame_count(ref10k.size());
  std::vector<double> energy(frames);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < frames; ++f) {
    const auto fr = detail::windowed_frame(ref10k, f * kHop);
    double sq = 0.0;
    for (double v : fr) sq += v * v;
    energy[f] = 20.0 * std::log10(std::sqrt(sq) + kEps);
    top = std::max(top, energy[f]);
  }
  std::vector<bool> keep(frames);
  for (std::size_t f = 0; f < frames; ++f) keep[f] = (top - kDynRangeDb - energy[f]) < 0.0;
  return keep;
}

namespace detail {

/// Drops the masked frames and overlap-adds the survivors.
inline std::vector<double> drop_frames(const std::vector<double>& x, const std::vector<bool>& keep) {
  using namespace stoi_constants;
  std::size_t kept = 0;
  for (bool k : keep) kept += k;
  if (kept == 0) return {};
  std::vector<double> out((kept - 1) * kHop + kFrameLen, 0.0);
  std::size_t slot = 0;
  for (std::size_t f = 0; f < keep.size(); ++f) {
    if (!keep[f]) continue;
    const auto fr = windowed_frame(x, f * kHop);
    for (std::size_t i = 0; i < fr.size(); ++i) out[slot * kHop + i] += fr[i];
    ++slot;
  }
  return out;
}

/// Band envelopes [frames][bands].
inline std::vector<std::vector<double>> band_envelopes(const std::vector<double>& x,
                                                       const BandDefinition& bands) {
  using namespace stoi_constants;
  const std::size_t frames = frame_count(x.size());
  std::vector<std::vector<double>> env(frames, std::vector<double>(kBands));
  for (std::size_t f = 0; f < frames; ++f) {
    const auto pw = power_spectrum(windowed_frame(x, f * kHop), kFftSize);
    for (std::size_t b = 0; b < kBands; ++b) {
      double acc = 0.0;
      for (std::size_t k = bands.bin_lo[b]; k < bands.bin_hi[b]; ++k) acc += pw[k];
      env[f][b] = std::sqrt(acc);
    }
  }
  return env;
}

}  // namespace detail

/// STOI of `est` against `ref`, both sampled at `fs_hz`.
template <typename Real>
double stoi(const Tensor<Real>& ref, const Tensor<Real>& est, double fs_hz) {
  using namespace stoi_constants;
  require_rank(ref, 1, "stoi reference");
  require_rank(est, 1, "stoi estimate");
  if (ref.size() != est.size()) {
    throw ShapeError("stoi: reference has " + std::to_string(ref.size()) + " samples, estimate " +
                     std::to_string(est.size()));
  }
  auto to10k = [&](const Tensor<Real>& t) {
    Tensor<double> d = t.template cast<double>();
    if (fs_hz != kSampleRate) d = resample(d, fs_hz, kSampleRate);
    return d.storage();
  };
  const auto x10 = to10k(ref);
  const auto y10 = to10k(est);

  const auto keep = speech_frame_mask(x10);
  const auto xs = detail::drop_frames(x10, keep);
  const auto ys = detail::drop_frames(y10, keep);

  static const BandDefinition bands = BandDefinition::standard();
  const auto xe = detail::band_envelopes(xs, bands);
  const auto ye = detail::band_envelopes(ys, bands);
  const std::size_t frames = xe.size();
  if (frames < kSegmentFrames) {
    throw InsufficientSignalError("stoi: " + std::to_string(frames) +
                                  " analysis frames after silence removal, need " +
                                  std::to_string(kSegmentFrames));
  }

  const double clip = 1.0 + std::pow(10.0, -kBetaDb / 20.0);
  const std::size_t segments = frames - kSegmentFrames + 1;
  const std::size_t n = kSegmentFrames;
  double total = 0.0;
  std::vector<double> xv(n), yv(n);
  for (std::size_t m = 0; m < segments; ++m) {
    for (std::size_t b = 0; b < kBands; ++b) {
      double xn = 0.0, yn = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        xv[i] = xe[m + i][b];
        yv[i] = ye[m + i][b];
        xn += xv[i] * xv[i];
        yn += yv[i] * yv[i];
      }
      const double scale = std::sqrt(xn) / (std::sqrt(yn) + kEps);
      double xm = 0.0, ym = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        yv[i] = std::min(yv[i] * scale, xv[i] * clip);
        xm += xv[i];
        ym += yv[i];
      }
      xm /= double(n);
      ym /= double(n);
      double xx = 0.0, yy = 0.0, xy = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double a = xv[i] - xm, c = yv[i] - ym;
        xx += a * a;
        yy += c * c;
        xy += a * c;
      }
      total += xy / ((std::sqrt(xx) + kEps) * (std::sqrt(yy) + kEps));
    }
  }
  return total / double(kBands * segments);
}

}  // namespace avse::metrics
