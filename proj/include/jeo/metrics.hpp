#pragma once

#include <string>

#include "jeo/image.hpp"

namespace jeo {

/// 10*log10(peak^2 / MSE) with peak = max of ref. Identical images give
/// +inf. Inputs are magnitude images.
double psnr(const RealImage& test, const RealImage& ref);

/// Mean local SSIM: Gaussian window size 11, sigma 1.5, K1 = 0.01,
/// K2 = 0.03, dynamic range = peak of ref. Circular boundary.
double ssim(const RealImage& test, const RealImage& ref);

/// |test - ref| per pixel.
RealImage error_map(const RealImage& test, const RealImage& ref);

struct MetricReport {
  std::string method;
  std::string scheme;
  double acceleration = 0.0;
  uint64_t seed = 0;
  double psnr_db = 0.0;
  double ssim_val = 0.0;
  double mse = 0.0;

  static std::string csv_header();
  std::string csv_row() const;
};

}  // namespace jeo
