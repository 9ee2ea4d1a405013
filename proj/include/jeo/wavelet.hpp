#pragma once

#include <array>

#include "jeo/image.hpp"

namespace jeo {

/// High-frequency subbands of the single-level stationary Haar transform.
/// Undecimated: every subband keeps the source grid.
struct DetailCoefficients {
  enum Band { LH = 0, HL = 1, HH = 2 };
  std::array<ComplexImage, 3> subbands;

  int height() const { return subbands[0].height; }
  int width() const { return subbands[0].width; }
};

/// Detail part of the stationary Haar analysis: separable circular
/// correlation with low = (1/2)[1,1], high = (1/2)[1,-1].
/// LH is high-pass along rows (height axis), HL along columns (width axis).
DetailCoefficients swt_detail(const ComplexImage& img);

/// Exact adjoint of swt_detail under the standard inner product.
ComplexImage swt_detail_adjoint(const DetailCoefficients& coeffs);

/// The excluded low-pass (LL) branch and its adjoint. Together with the
/// detail branch these form a tight frame: W^H W + L^H L = I.
ComplexImage swt_ll(const ComplexImage& img);
ComplexImage swt_ll_adjoint(const ComplexImage& ll);

/// (v - min)/(max - min) with min/max taken jointly over all three arrays.
/// Degenerate max == min maps everything to zero.
std::array<RealImage, 3> minmax_normalize(const std::array<RealImage, 3>& mag);

namespace wavelet_detail {

// Circular correlation with a 2-tap filter (f0, f1) at offsets {0, +1},
// along rows (axis 0) or columns (axis 1). Shared by the complex transform
// and the real per-channel filtering the shrinkage module needs.
template <typename T>
void filt2(const T* in, T* out, int h, int w, double f0, double f1, int axis) {
  if (axis == 0) {
    for (int i = 0; i < h; ++i) {
      const T* row = in + static_cast<size_t>(i) * w;
      const T* nxt = in + static_cast<size_t>((i + 1) % h) * w;
      T* o = out + static_cast<size_t>(i) * w;
      for (int j = 0; j < w; ++j) o[j] = f0 * row[j] + f1 * nxt[j];
    }
  } else {
    for (int i = 0; i < h; ++i) {
      const T* row = in + static_cast<size_t>(i) * w;
      T* o = out + static_cast<size_t>(i) * w;
      for (int j = 0; j < w - 1; ++j) o[j] = f0 * row[j] + f1 * row[j + 1];
      o[w - 1] = f0 * row[w - 1] + f1 * row[0];
    }
  }
}

// Adjoint of filt2: circular correlation with the reversed filter at
// offsets {0, -1}.
template <typename T>
void filt2_adj(const T* in, T* out, int h, int w, double f0, double f1, int axis) {
  if (axis == 0) {
    for (int i = 0; i < h; ++i) {
      const T* row = in + static_cast<size_t>(i) * w;
      const T* prv = in + static_cast<size_t>((i + h - 1) % h) * w;
      T* o = out + static_cast<size_t>(i) * w;
      for (int j = 0; j < w; ++j) o[j] = f0 * row[j] + f1 * prv[j];
    }
  } else {
    for (int i = 0; i < h; ++i) {
      const T* row = in + static_cast<size_t>(i) * w;
      T* o = out + static_cast<size_t>(i) * w;
      o[0] = f0 * row[0] + f1 * row[w - 1];
      for (int j = 1; j < w; ++j) o[j] = f0 * row[j] + f1 * row[j - 1];
    }
  }
}

inline constexpr double kLow0 = 0.5, kLow1 = 0.5;
inline constexpr double kHigh0 = 0.5, kHigh1 = -0.5;

// Detail analysis of one channel into three planes (LH, HL, HH order).
template <typename T>
void detail_analysis(const T* in, T* lh, T* hl, T* hh, T* scratch, int h, int w) {
  // LH: low along width, high along height
  filt2(in, scratch, h, w, kLow0, kLow1, 1);
  filt2(scratch, lh, h, w, kHigh0, kHigh1, 0);
  // HL: low along height, high along width
  filt2(in, scratch, h, w, kLow0, kLow1, 0);
  filt2(scratch, hl, h, w, kHigh0, kHigh1, 1);
  // HH: high along both
  filt2(in, scratch, h, w, kHigh0, kHigh1, 0);
  filt2(scratch, hh, h, w, kHigh0, kHigh1, 1);
}

// Adjoint of detail_analysis, accumulated into out (out must be zeroed).
template <typename T>
void detail_adjoint(const T* lh, const T* hl, const T* hh, T* out, T* s1, T* s2, int h, int w) {
  const size_t n = static_cast<size_t>(h) * w;
  filt2_adj(lh, s1, h, w, kHigh0, kHigh1, 0);
  filt2_adj(s1, s2, h, w, kLow0, kLow1, 1);
  for (size_t k = 0; k < n; ++k) out[k] += s2[k];
  filt2_adj(hl, s1, h, w, kHigh0, kHigh1, 1);
  filt2_adj(s1, s2, h, w, kLow0, kLow1, 0);
  for (size_t k = 0; k < n; ++k) out[k] += s2[k];
  filt2_adj(hh, s1, h, w, kHigh0, kHigh1, 1);
  filt2_adj(s1, s2, h, w, kHigh0, kHigh1, 0);
  for (size_t k = 0; k < n; ++k) out[k] += s2[k];
}

}  // namespace wavelet_detail

}  // namespace jeo
