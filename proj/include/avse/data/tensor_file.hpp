#pragma once

#include <filesystem>
#include <limits>
#include <string>

#include "avse/data/bytes.hpp"
#include "avse/tensor.hpp"

// AVST layout, all little-endian:
//   "AVST" | version u8 = 1 | dtype u8 = 0 (float32) | ndim u8 | reserved u8 = 0
//   | ndim x u32 extents | row-major float32 payload

namespace avse::data {

inline constexpr std::uint8_t kAvstVersion = 1;
inline constexpr std::uint8_t kAvstFloat32 = 0;

inline std::size_t avst_header_bytes(std::size_t ndim) { return 8 + 4 * ndim; }

inline void encode_tensor(Bytes& out, const Tensor<float>& t) {
  if (t.empty()) throw ShapeError("write_tensor: empty tensor");
  if (t.rank() > 255) throw ShapeError("write_tensor: rank above 255");
  ByteWriter w(out);
  w.tag("AVST");
  w.u8(kAvstVersion);
  w.u8(kAvstFloat32);
  w.u8(std::uint8_t(t.rank()));
  w.u8(0);
  for (std::size_t d : t.dims()) {
    if (d > std::numeric_limits<std::uint32_t>::max()) throw ShapeError("write_tensor: extent overflow");
    w.u32(std::uint32_t(d));
  }
  w.raw(t.ptr(), 4 * t.size());
}

/// Reads one tensor block at the cursor. With `exact`, the block must end
/// the buffer.
inline Tensor<float> decode_tensor(ByteReader& r, const std::string& what, bool exact) {
  const std::string magic = r.tag();
  if (magic != "AVST") throw CorruptFileError(what + ": bad magic '" + magic + "'");
  const auto version = r.u8();
  if (version != kAvstVersion)
    throw CorruptFileError(what + ": unsupported version " + std::to_string(version));
  const auto dtype = r.u8();
  if (dtype != kAvstFloat32) throw CorruptFileError(what + ": unsupported dtype " + std::to_string(dtype));
  const auto ndim = r.u8();
  r.u8();
  if (ndim == 0) throw CorruptFileError(what + ": zero-rank tensor");
  Shape dims(ndim);
  for (auto& d : dims) {
    d = r.u32();
    if (d == 0) throw CorruptFileError(what + ": zero extent");
  }
  const std::size_t n = shape_size(dims);
  if (exact && r.remaining() != 4 * n) {
    throw CorruptFileError(what + ": payload holds " + std::to_string(r.remaining()) +
                           " bytes, extents " + shape_string(dims) + " need " + std::to_string(4 * n));
  }
  const auto* p = r.take(4 * n);
  std::vector<float> values(n);
  std::memcpy(values.data(), p, 4 * n);
  return Tensor<float>(std::move(dims), std::move(values));
}

inline void write_tensor(const std::filesystem::path& path, const Tensor<float>& t) {
  Bytes out;
  encode_tensor(out, t);
  write_file(path, out);
}

inline Tensor<float> read_tensor(const std::filesystem::path& path) {
  const Bytes bytes = read_file(path);
  ByteReader r(bytes, path.string());
  return decode_tensor(r, path.string(), true);
}

}  // namespace avse::data
