#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "jeo/image.hpp"

namespace jeo {

/// Allocator that skips value-initialization on resize, for buffers that
/// are fully overwritten right after allocation.
template <class T>
struct uninit_allocator : std::allocator<T> {
  template <class U>
  struct rebind {
    using other = uninit_allocator<U>;
  };
  template <class U>
  void construct(U* p) noexcept(std::is_nothrow_default_constructible_v<U>) {
    ::new (static_cast<void*>(p)) U;
  }
  template <class U, class... Args>
  void construct(U* p, Args&&... args) {
    ::new (static_cast<void*>(p)) U(std::forward<Args>(args)...);
  }
};

using real_buffer = std::vector<double, uninit_allocator<double>>;

/// Multi-channel 2-D array, real or complex. The value type flowing
/// through the tape; scalars are 1x1x1 real tensors.
struct Tensor {
  enum class Kind : uint8_t { Real, Complex };

  Kind kind = Kind::Real;
  int channels = 0;
  int height = 0;
  int width = 0;
  real_buffer r;
  std::vector<cplx> c;

  static Tensor real(int ch, int h, int w) {
    Tensor t = real_uninit(ch, h, w);
    std::fill(t.r.begin(), t.r.end(), 0.0);
    return t;
  }

  /// Real tensor with uninitialized payload; caller must write every entry.
  static Tensor real_uninit(int ch, int h, int w) {
    Tensor t;
    t.kind = Kind::Real;
    t.channels = ch;
    t.height = h;
    t.width = w;
    t.r.resize(static_cast<size_t>(ch) * h * w);
    return t;
  }

  static Tensor complex(int ch, int h, int w) {
    Tensor t;
    t.kind = Kind::Complex;
    t.channels = ch;
    t.height = h;
    t.width = w;
    t.c.assign(static_cast<size_t>(ch) * h * w, cplx{0.0, 0.0});
    return t;
  }

  static Tensor scalar(double v) {
    Tensor t = real(1, 1, 1);
    t.r[0] = v;
    return t;
  }

  bool is_complex() const { return kind == Kind::Complex; }
  size_t plane() const { return static_cast<size_t>(height) * width; }
  size_t count() const { return static_cast<size_t>(channels) * height * width; }

  bool same_shape(const Tensor& o) const {
    return kind == o.kind && channels == o.channels && height == o.height && width == o.width;
  }

  double scalar_value() const { return r[0]; }

  Tensor zeros_like() const {
    return is_complex() ? complex(channels, height, width) : real(channels, height, width);
  }

  double* plane_r(int ch) { return r.data() + static_cast<size_t>(ch) * plane(); }
  const double* plane_r(int ch) const { return r.data() + static_cast<size_t>(ch) * plane(); }
  cplx* plane_c(int ch) { return c.data() + static_cast<size_t>(ch) * plane(); }
  const cplx* plane_c(int ch) const { return c.data() + static_cast<size_t>(ch) * plane(); }
};

Tensor tensor_from(const ComplexImage& img);
Tensor tensor_from(const RealImage& img);
ComplexImage image_from(const Tensor& t, int channel = 0);
RealImage real_image_from(const Tensor& t, int channel = 0);

/// Named parameter arrays with matching gradient slots.
struct TensorSet {
  struct Entry {
    std::string name;
    Tensor value;
    Tensor grad;
  };
  std::vector<Entry> entries;

  Tensor& add(const std::string& name, Tensor v);
  Entry& at(const std::string& name);
  const Entry& at(const std::string& name) const;
  void zero_grads();
};

}  // namespace jeo
