#include "jeo/wavelet.hpp"

#include <algorithm>
#include <limits>

namespace jeo {

using namespace wavelet_detail;

DetailCoefficients swt_detail(const ComplexImage& img) {
  if (img.height < 2 || img.width < 2)
    throw std::invalid_argument("swt_detail: image must be at least 2x2");
  const int h = img.height, w = img.width;
  DetailCoefficients out;
  for (auto& b : out.subbands) b = ComplexImage(h, w);
  ComplexImage scratch(h, w);
  detail_analysis(img.data.data(), out.subbands[DetailCoefficients::LH].data.data(),
                  out.subbands[DetailCoefficients::HL].data.data(),
                  out.subbands[DetailCoefficients::HH].data.data(), scratch.data.data(), h, w);
  return out;
}

ComplexImage swt_detail_adjoint(const DetailCoefficients& coeffs) {
  const ComplexImage& lh = coeffs.subbands[0];
  for (int b = 1; b < 3; ++b)
    if (!coeffs.subbands[b].same_shape(lh))
      throw std::invalid_argument("swt_detail_adjoint: subband shape mismatch");
  const int h = lh.height, w = lh.width;
  ComplexImage out(h, w), s1(h, w), s2(h, w);
  detail_adjoint(coeffs.subbands[0].data.data(), coeffs.subbands[1].data.data(),
                 coeffs.subbands[2].data.data(), out.data.data(), s1.data.data(), s2.data.data(),
                 h, w);
  return out;
}

ComplexImage swt_ll(const ComplexImage& img) {
  if (img.height < 2 || img.width < 2) throw std::invalid_argument("swt_ll: image must be at least 2x2");
  ComplexImage tmp(img.height, img.width), out(img.height, img.width);
  filt2(img.data.data(), tmp.data.data(), img.height, img.width, kLow0, kLow1, 0);
  filt2(tmp.data.data(), out.data.data(), img.height, img.width, kLow0, kLow1, 1);
  return out;
}

ComplexImage swt_ll_adjoint(const ComplexImage& ll) {
  ComplexImage tmp(ll.height, ll.width), out(ll.height, ll.width);
  filt2_adj(ll.data.data(), tmp.data.data(), ll.height, ll.width, kLow0, kLow1, 1);
  filt2_adj(tmp.data.data(), out.data.data(), ll.height, ll.width, kLow0, kLow1, 0);
  return out;
}

std::array<RealImage, 3> minmax_normalize(const std::array<RealImage, 3>& mag) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& m : mag)
    for (double v : m.data) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  std::array<RealImage, 3> out;
  const double span = hi - lo;
  for (int b = 0; b < 3; ++b) {
    out[b] = RealImage(mag[b].height, mag[b].width);
    if (span > 0.0)
      for (size_t k = 0; k < mag[b].data.size(); ++k) out[b].data[k] = (mag[b].data[k] - lo) / span;
    // span == 0 leaves everything at zero
  }
  return out;
}

}  // namespace jeo
