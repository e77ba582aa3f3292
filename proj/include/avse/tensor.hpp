#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "avse/error.hpp"

namespace avse {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string shape_string(const Shape& dims) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < dims.size(); ++i) os << (i ? "," : "") << dims[i];
  os << ']';
  return os.str();
}

/// Dense row-major array. A default-constructed tensor is the empty
/// placeholder (no dims, no data) used for absent optional inputs such as a
/// disabled bias; every other tensor has positive extents and
/// `data().size() == shape_size(dims())`.
template <typename Real>
class Tensor {
 public:
  using value_type = Real;

  Tensor() = default;

  explicit Tensor(Shape dims, Real fill = Real(0)) : dims_(std::move(dims)) {
    check_dims();
    data_.assign(shape_size(dims_), fill);
  }

  Tensor(Shape dims, std::vector<Real> data) : dims_(std::move(dims)), data_(std::move(data)) {
    check_dims();
    if (data_.size() != shape_size(dims_)) {
      throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                       " does not match dims " + shape_string(dims_));
    }
  }

  static Tensor vector(std::vector<Real> values) {
    const std::size_t n = values.size();
    return Tensor({n}, std::move(values));
  }

  bool empty() const noexcept { return data_.empty(); }
  const Shape& dims() const noexcept { return dims_; }
  std::size_t rank() const noexcept { return dims_.size(); }
  std::size_t dim(std::size_t axis) const {
    if (axis >= dims_.size()) {
      throw ShapeError("axis " + std::to_string(axis) + " out of range for " + shape_string(dims_));
    }
    return dims_[axis];
  }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<Real> data() noexcept { return data_; }
  std::span<const Real> data() const noexcept { return data_; }
  Real* ptr() noexcept { return data_.data(); }
  const Real* ptr() const noexcept { return data_.data(); }
  std::vector<Real>& storage() noexcept { return data_; }
  const std::vector<Real>& storage() const noexcept { return data_; }

  Real& operator[](std::size_t i) { return data_[i]; }
  const Real& operator[](std::size_t i) const { return data_[i]; }

  template <typename... Idx>
  Real& at(Idx... idx) {
    return data_[offset(idx...)];
  }
  template <typename... Idx>
  const Real& at(Idx... idx) const {
    return data_[offset(idx...)];
  }

  Tensor reshaped(Shape dims) const& {
    Tensor out = *this;
    return std::move(out).reshaped(std::move(dims));
  }
  Tensor reshaped(Shape dims) && {
    if (shape_size(dims) != data_.size()) {
      throw ShapeError("cannot reshape " + shape_string(dims_) + " to " + shape_string(dims));
    }
    dims_ = std::move(dims);
    check_dims();
    return std::move(*this);
  }

  template <typename Other>
  Tensor<Other> cast() const {
    if (empty()) return Tensor<Other>();
    std::vector<Other> out(data_.begin(), data_.end());
    return Tensor<Other>(dims_, std::move(out));
  }

  void fill(Real v) { std::fill(data_.begin(), data_.end(), v); }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](Real v) { return std::isfinite(v); });
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.dims_ == b.dims_ && a.data_ == b.data_;
  }

 private:
  void check_dims() const {
    for (std::size_t d : dims_) {
      if (d == 0) throw ShapeError("tensor extents must be positive, got " + shape_string(dims_));
    }
  }

  template <typename... Idx>
  std::size_t offset(Idx... idx) const {
    const std::size_t ids[] = {static_cast<std::size_t>(idx)...};
    std::size_t off = 0;
    for (std::size_t a = 0; a < sizeof...(Idx); ++a) off = off * dims_[a] + ids[a];
    return off;
  }

  Shape dims_;
  std::vector<Real> data_;
};

template <typename Real>
void require_shape(const Tensor<Real>& t, const Shape& expected, const char* what) {
  if (t.dims() != expected) {
    throw ShapeError(std::string(what) + ": expected " + shape_string(expected) + ", got " +
                     shape_string(t.dims()));
  }
}

template <typename Real>
void require_rank(const Tensor<Real>& t, std::size_t rank, const char* what) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(what) + ": expected rank " + std::to_string(rank) + ", got " +
                     shape_string(t.dims()));
  }
}

template <typename Real>
double dot(const Tensor<Real>& a, const Tensor<Real>& b) {
  if (a.size() != b.size()) throw ShapeError("dot: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += double(a[i]) * double(b[i]);
  return acc;
}

/// `dst += src`; an empty `dst` is first sized like `src`.
template <typename Real>
void accumulate(Tensor<Real>& dst, const Tensor<Real>& src) {
  if (dst.empty()) {
    dst = src;
    return;
  }
  if (dst.dims() != src.dims()) {
    throw ShapeError("accumulate: " + shape_string(dst.dims()) + " vs " + shape_string(src.dims()));
  }
  Real* d = dst.ptr();
  const Real* s = src.ptr();
  for (std::size_t i = 0; i < dst.size(); ++i) d[i] += s[i];
}

}  // namespace avse
