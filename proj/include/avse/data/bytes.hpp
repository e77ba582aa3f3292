#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "avse/error.hpp"

namespace avse::data {

static_assert(std::endian::native == std::endian::little,
              "file codecs assume a little-endian host");

using Bytes = std::vector<std::uint8_t>;

inline Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure on '" + path.string() + "'");
  return data;
}

inline void write_file(const std::filesystem::path& path, const Bytes& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(data.data()), std::streamsize(data.size()));
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

class ByteWriter {
 public:
  explicit ByteWriter(Bytes& out) : out_(out) {}

  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void tag(std::string_view four) { raw(four.data(), four.size()); }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { raw(&v, 2); }
  void u32(std::uint32_t v) { raw(&v, 4); }
  void u64(std::uint64_t v) { raw(&v, 8); }
  void i16(std::int16_t v) { raw(&v, 2); }
  void f32(float v) { raw(&v, 4); }
  void f64(double v) { raw(&v, 8); }

 private:
  Bytes& out_;
};

/// Bounds-checked little-endian cursor. Running past the end throws
/// CorruptFileError naming `what`.
class ByteReader {
 public:
  ByteReader(const Bytes& data, std::string what) : data_(data), what_(std::move(what)) {}

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }
  bool done() const { return pos_ == data_.size(); }

  const std::uint8_t* take(std::size_t n) {
    if (n > remaining()) {
      throw CorruptFileError(what_ + ": truncated (needed " + std::to_string(n) + " bytes at offset " +
                             std::to_string(pos_) + ", " + std::to_string(remaining()) + " left)");
    }
    const auto* p = data_.data() + pos_;
    pos_ += n;
    return p;
  }
  void skip(std::size_t n) { take(n); }
  std::string tag() {
    const auto* p = take(4);
    return std::string(reinterpret_cast<const char*>(p), 4);
  }
  std::string str(std::size_t n) {
    const auto* p = take(n);
    return std::string(reinterpret_cast<const char*>(p), n);
  }
  template <typename T>
  T scalar() {
    T v;
    std::memcpy(&v, take(sizeof(T)), sizeof(T));
    return v;
  }
  std::uint8_t u8() { return scalar<std::uint8_t>(); }
  std::uint16_t u16() { return scalar<std::uint16_t>(); }
  std::uint32_t u32() { return scalar<std::uint32_t>(); }
  std::uint64_t u64() { return scalar<std::uint64_t>(); }
  std::int16_t i16() { return scalar<std::int16_t>(); }
  float f32() { return scalar<float>(); }
  double f64() { return scalar<double>(); }

 private:
  const Bytes& data_;
  std::string what_;
  std::size_t pos_ = 0;
};

}  // namespace avse::data
