#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

namespace jeo {

using cplx = std::complex<double>;

/// 2-D complex array, row-major. Carries the reconstruction variable x
/// and every image-domain / k-space intermediate.
struct ComplexImage {
  int height = 0;
  int width = 0;
  std::vector<cplx> data;

  ComplexImage() = default;
  ComplexImage(int h, int w) : height(h), width(w), data(check_dims(h, w)) {}

  cplx& at(int i, int j) { return data[static_cast<size_t>(i) * width + j]; }
  const cplx& at(int i, int j) const { return data[static_cast<size_t>(i) * width + j]; }

  size_t size() const { return data.size(); }
  bool same_shape(const ComplexImage& o) const { return height == o.height && width == o.width; }

private:
  static size_t check_dims(int h, int w) {
    if (h <= 0 || w <= 0) throw std::invalid_argument("ComplexImage: dimensions must be positive");
    return static_cast<size_t>(h) * static_cast<size_t>(w);
  }
};

/// 2-D real array, row-major (magnitudes, masks as floats, metric inputs).
struct RealImage {
  int height = 0;
  int width = 0;
  std::vector<double> data;

  RealImage() = default;
  RealImage(int h, int w) : height(h), width(w), data(check_dims(h, w)) {}

  double& at(int i, int j) { return data[static_cast<size_t>(i) * width + j]; }
  const double& at(int i, int j) const { return data[static_cast<size_t>(i) * width + j]; }

  size_t size() const { return data.size(); }
  bool same_shape(const RealImage& o) const { return height == o.height && width == o.width; }

private:
  static size_t check_dims(int h, int w) {
    if (h <= 0 || w <= 0) throw std::invalid_argument("RealImage: dimensions must be positive");
    return static_cast<size_t>(h) * static_cast<size_t>(w);
  }
};

/// Sum of conj(a)*b over all pixels.
inline cplx dot(const ComplexImage& a, const ComplexImage& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("dot: shape mismatch");
  cplx s{0.0, 0.0};
  for (size_t k = 0; k < a.data.size(); ++k) s += std::conj(a.data[k]) * b.data[k];
  return s;
}

inline double norm2(const ComplexImage& a) { return std::sqrt(dot(a, a).real()); }

inline RealImage magnitude(const ComplexImage& a) {
  RealImage m(a.height, a.width);
  for (size_t k = 0; k < a.data.size(); ++k) m.data[k] = std::abs(a.data[k]);
  return m;
}

}  // namespace jeo
