#pragma once

#include <cmath>
#include <filesystem>
#include <string>

#include "avse/data/bytes.hpp"
#include "avse/tensor.hpp"

namespace avse::data {

struct Wave {
  Tensor<float> samples;  // [T], in [-1, 1)
  std::size_t sample_rate_hz = 0;
};

/// Parses a RIFF/WAVE PCM16 mono buffer. `name` only labels errors.
inline Wave decode_wav(const Bytes& bytes, const std::string& name = "wav") {
  ByteReader r(bytes, name);
  const std::string riff = r.tag();
  if (riff == "RIFX") throw UnsupportedFormatError(name + ": container 'RIFX' (big-endian) is not supported");
  if (riff != "RIFF") throw UnsupportedFormatError(name + ": container '" + riff + "' is not RIFF");
  r.u32();  // RIFF size; chunk sizes are what we trust
  const std::string wave = r.tag();
  if (wave != "WAVE") throw UnsupportedFormatError(name + ": form type '" + wave + "' is not WAVE");

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  while (!r.done()) {
    const std::string id = r.tag();
    const std::uint32_t size = r.u32();
    if (id == "fmt ") {
      if (size < 16) throw CorruptFileError(name + ": fmt chunk of " + std::to_string(size) + " bytes");
      ByteReader f(bytes, name);
      f.skip(r.pos());
      r.skip(size);
      format = f.u16();
      channels = f.u16();
      rate = f.u32();
      f.u32();  // byte rate
      f.u16();  // block align
      bits = f.u16();
      have_fmt = true;
      if (format != 1) {
        throw UnsupportedFormatError(name + ": audio_format " + std::to_string(format) +
                                     " is not PCM (1)");
      }
      if (channels != 1) {
        throw UnsupportedFormatError(name + ": num_channels " + std::to_string(channels) +
                                     " is not mono (1)");
      }
      if (bits != 16) {
        throw UnsupportedFormatError(name + ": bits_per_sample " + std::to_string(bits) +
                                     " is not 16");
      }
      if (rate == 0) throw CorruptFileError(name + ": sample_rate is 0");
    } else if (id == "data") {
      if (!have_fmt) throw CorruptFileError(name + ": data chunk before fmt chunk");
      if (size % 2 != 0) throw CorruptFileError(name + ": data chunk holds a partial sample");
      const std::size_t n = size / 2;
      const auto* p = r.take(size);
      if (n == 0) throw CorruptFileError(name + ": no samples");
      Tensor<float> samples({n});
      for (std::size_t i = 0; i < n; ++i) {
        std::int16_t v;
        std::memcpy(&v, p + 2 * i, 2);
        samples[i] = float(v) / 32768.0f;
      }
      return {std::move(samples), rate};
    } else {
      r.skip(size);
    }
    if (size % 2 == 1 && !r.done()) r.skip(1);
  }
  throw CorruptFileError(name + ": no data chunk");
}

inline Wave load_wav(const std::filesystem::path& path) {
  return decode_wav(read_file(path), path.string());
}

/// Quantizes one sample: clamp to [-1, 1), scale by 32768, round half away
/// from zero, saturate to the int16 range.
inline std::int16_t quantize_pcm16(float x) {
  if (!std::isfinite(x)) throw NumericError("save_wav: non-finite sample");
  const double v = std::round(std::clamp(double(x), -1.0, 1.0) * 32768.0);
  return std::int16_t(std::clamp(v, -32768.0, 32767.0));
}

/// Canonical 44-byte-header PCM16 mono RIFF.
inline Bytes encode_wav(const Tensor<float>& wave, std::size_t sample_rate_hz) {
  require_rank(wave, 1, "save_wav input");
  const std::uint32_t data_bytes = std::uint32_t(2 * wave.size());
  Bytes out;
  out.reserve(44 + data_bytes);
  ByteWriter w(out);
  w.tag("RIFF");
  w.u32(36 + data_bytes);
  w.tag("WAVE");
  w.tag("fmt ");
  w.u32(16);
  w.u16(1);
  w.u16(1);
  w.u32(std::uint32_t(sample_rate_hz));
  w.u32(std::uint32_t(sample_rate_hz * 2));
  w.u16(2);
  w.u16(16);
  w.tag("data");
  w.u32(data_bytes);
  for (float x : wave.data()) w.i16(quantize_pcm16(x));
  return out;
}

inline void save_wav(const std::filesystem::path& path, const Tensor<float>& wave,
                     std::size_t sample_rate_hz) {
  write_file(path, encode_wav(wave, sample_rate_hz));
}

}  // namespace avse::data
