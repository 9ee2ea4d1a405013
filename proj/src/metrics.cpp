#include "jeo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "jeo/io_util.hpp"

namespace jeo {

namespace {

double peak_of(const RealImage& ref) {
  double peak = 0.0;
  for (double v : ref.data) peak = std::max(peak, v);
  return peak;
}

double mse_of(const RealImage& a, const RealImage& b) {
  double acc = 0.0;
  for (size_t k = 0; k < a.data.size(); ++k) {
    const double d = a.data[k] - b.data[k];
    acc += d * d;
  }
  return acc / static_cast<double>(a.data.size());
}

// Separable circular Gaussian filtering, window 11, sigma 1.5.
void gauss_filter(const RealImage& in, RealImage& out) {
  constexpr int kHalf = 5;
  static const std::vector<double> kernel = [] {
    std::vector<double> k(2 * kHalf + 1);
    double sum = 0.0;
    for (int i = -kHalf; i <= kHalf; ++i) {
      k[i + kHalf] = std::exp(-(i * i) / (2.0 * 1.5 * 1.5));
      sum += k[i + kHalf];
    }
    for (double& v : k) v /= sum;
    return k;
  }();
  const int h = in.height, w = in.width;
  RealImage tmp(h, w);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      double acc = 0.0;
      for (int t = -kHalf; t <= kHalf; ++t) acc += kernel[t + kHalf] * in.at(i, (j + t + w) % w);
      tmp.at(i, j) = acc;
    }
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      double acc = 0.0;
      for (int t = -kHalf; t <= kHalf; ++t) acc += kernel[t + kHalf] * tmp.at((i + t + h) % h, j);
      out.at(i, j) = acc;
    }
}

}  // namespace

double psnr(const RealImage& test, const RealImage& ref) {
  if (!test.same_shape(ref)) throw std::invalid_argument("psnr: shape mismatch");
  const double mse = mse_of(test, ref);
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  const double peak = peak_of(ref);
  return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const RealImage& test, const RealImage& ref) {
  if (!test.same_shape(ref)) throw std::invalid_argument("ssim: shape mismatch");
  if (test.height < 11 || test.width < 11)
    throw std::invalid_argument("ssim: image smaller than the 11x11 window");
  double range = peak_of(ref);
  if (range <= 0.0) range = 1.0;
  const double c1 = (0.01 * range) * (0.01 * range);
  const double c2 = (0.03 * range) * (0.03 * range);

  const int h = test.height, w = test.width;
  RealImage xx(h, w), yy(h, w), xy(h, w);
  for (size_t k = 0; k < test.data.size(); ++k) {
    xx.data[k] = test.data[k] * test.data[k];
    yy.data[k] = ref.data[k] * ref.data[k];
    xy.data[k] = test.data[k] * ref.data[k];
  }
  RealImage mx(h, w), my(h, w), mxx(h, w), myy(h, w), mxy(h, w);
  gauss_filter(test, mx);
  gauss_filter(ref, my);
  gauss_filter(xx, mxx);
  gauss_filter(yy, myy);
  gauss_filter(xy, mxy);

  double acc = 0.0;
  for (size_t k = 0; k < test.data.size(); ++k) {
    const double vx = mxx.data[k] - mx.data[k] * mx.data[k];
    const double vy = myy.data[k] - my.data[k] * my.data[k];
    const double cxy = mxy.data[k] - mx.data[k] * my.data[k];
    const double num = (2.0 * mx.data[k] * my.data[k] + c1) * (2.0 * cxy + c2);
    const double den = (mx.data[k] * mx.data[k] + my.data[k] * my.data[k] + c1) * (vx + vy + c2);
    acc += num / den;
  }
  return acc / static_cast<double>(test.data.size());
}

RealImage error_map(const RealImage& test, const RealImage& ref) {
  if (!test.same_shape(ref)) throw std::invalid_argument("error_map: shape mismatch");
  RealImage out(test.height, test.width);
  for (size_t k = 0; k < test.data.size(); ++k) out.data[k] = std::abs(test.data[k] - ref.data[k]);
  return out;
}

std::string MetricReport::csv_header() { return "method,scheme,R,seed,psnr_db,ssim,mse"; }

std::string MetricReport::csv_row() const {
  return method + "," + scheme + "," + fmt_g9(acceleration) + "," + std::to_string(seed) + "," +
         fmt_g9(psnr_db) + "," + fmt_g9(ssim_val) + "," + fmt_g9(mse);
}

}  // namespace jeo
