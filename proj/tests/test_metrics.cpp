#include "doctest.h"
#include "jeo/metrics.hpp"
#include "test_util.hpp"

using namespace jeo;
using namespace jeo::test;

TEST_SUITE("metrics") {
  TEST_CASE("identical images report infinite PSNR") {
    Rng rng(301);
    const RealImage a = random_real_image(16, 16, rng);
    CHECK(std::isinf(psnr(a, a)));
    CHECK(psnr(a, a) > 0);
  }

  TEST_CASE("uniform 0.1 error at peak 1 is exactly 20 dB") {
    RealImage ref(8, 8), test(8, 8);
    Rng rng(303);
    for (size_t k = 0; k < ref.data.size(); ++k) ref.data[k] = rng.uniform(0.0, 0.9);
    ref.data[5] = 1.0;  // pin the peak
    for (size_t k = 0; k < ref.data.size(); ++k) test.data[k] = ref.data[k] + 0.1;
    CHECK(psnr(test, ref) == doctest::Approx(20.0).epsilon(1e-12));
  }

  TEST_CASE("PSNR is invariant to joint scaling") {
    Rng rng(305);
    const RealImage ref = random_real_image(12, 12, rng);
    const RealImage test = random_real_image(12, 12, rng);
    const double base = psnr(test, ref);
    for (double c : {0.5, 2.0}) {
      RealImage r2(12, 12), t2(12, 12);
      for (size_t k = 0; k < ref.data.size(); ++k) {
        r2.data[k] = c * ref.data[k];
        t2.data[k] = c * test.data[k];
      }
      CHECK(psnr(t2, r2) == doctest::Approx(base).epsilon(1e-12));
    }
  }

  TEST_CASE("PSNR increases strictly as MSE shrinks at fixed peak") {
    Rng rng(307);
    const RealImage ref = random_real_image(10, 10, rng);
    RealImage close(10, 10), far(10, 10);
    for (size_t k = 0; k < ref.data.size(); ++k) {
      close.data[k] = ref.data[k] + 0.01;
      far.data[k] = ref.data[k] + 0.1;
    }
    CHECK(psnr(close, ref) > psnr(far, ref));
  }

  TEST_CASE("shape mismatch is rejected") {
    RealImage a(4, 4), b(4, 5);
    CHECK_THROWS_AS((void)psnr(a, b), std::invalid_argument);
    CHECK_THROWS_AS((void)error_map(a, b), std::invalid_argument);
  }

  TEST_CASE("SSIM of identical images is 1") {
    Rng rng(311);
    const RealImage a = random_real_image(16, 16, rng);
    CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-9));
  }

  TEST_CASE("structural inversion scores well below 1") {
    Rng rng(313);
    RealImage ref(16, 16);
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j < 16; ++j)
        ref.at(i, j) = 0.5 + 0.3 * std::sin(0.8 * i) * std::cos(0.6 * j) +
                       0.05 * rng.uniform(-1.0, 1.0);
    RealImage inv(16, 16);
    for (size_t k = 0; k < ref.data.size(); ++k) inv.data[k] = 1.0 - ref.data[k];
    CHECK(ssim(inv, ref) < 0.5);
  }

  TEST_CASE("constant offset lowers the luminance term below 1") {
    Rng rng(317);
    const RealImage ref = random_real_image(16, 16, rng, 0.2, 0.8);
    RealImage off(16, 16);
    for (size_t k = 0; k < ref.data.size(); ++k) off.data[k] = ref.data[k] + 0.1;
    CHECK(ssim(off, ref) < 1.0);
  }

  TEST_CASE("SSIM stays within [-1, 1] on random pairs") {
    Rng rng(319);
    for (int t = 0; t < 20; ++t) {
      const RealImage a = random_real_image(12, 14, rng);
      const RealImage b = random_real_image(12, 14, rng);
      const double v = ssim(a, b);
      CHECK(v >= -1.0);
      CHECK(v <= 1.0);
    }
  }

  TEST_CASE("images smaller than the window are rejected") {
    RealImage a(10, 12), b(10, 12);
    CHECK_THROWS_AS((void)ssim(a, b), std::invalid_argument);
  }

  TEST_CASE("error map basics") {
    Rng rng(323);
    const RealImage a = random_real_image(8, 8, rng);
    const RealImage zero_map = error_map(a, a);
    for (double v : zero_map.data) CHECK(v == 0.0);

    RealImage b = a;
    b.at(3, 4) += 0.3;
    const RealImage m = error_map(b, a);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) {
        if (i == 3 && j == 4)
          CHECK(m.at(i, j) == doctest::Approx(0.3).epsilon(1e-12));
        else
          CHECK(m.at(i, j) == 0.0);
      }
    const RealImage ms = error_map(a, b);
    for (size_t k = 0; k < m.data.size(); ++k) CHECK(m.data[k] == ms.data[k]);
  }

  TEST_CASE("CSV rows use fixed formatting and serialize inf") {
    MetricReport r;
    r.method = "zero-filled";
    r.scheme = "random";
    r.acceleration = 4.0;
    r.seed = 7;
    r.psnr_db = std::numeric_limits<double>::infinity();
    r.ssim_val = 0.987654321123;
    r.mse = 1.0 / 3.0;
    CHECK(MetricReport::csv_header() == "method,scheme,R,seed,psnr_db,ssim,mse");
    CHECK(r.csv_row() == "zero-filled,random,4,7,inf,0.987654321,0.333333333");
  }
}
