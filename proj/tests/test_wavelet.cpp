#include "doctest.h"
#include "jeo/wavelet.hpp"
#include "test_util.hpp"

using namespace jeo;
using namespace jeo::test;

namespace {

// Independent brute-force oracle: separable circular correlation with
// explicit 2-tap filters at offsets {0, +1}, no shared code with the
// library transform.
ComplexImage oracle_filter(const ComplexImage& x, double f0, double f1, bool along_height) {
  ComplexImage out(x.height, x.width);
  for (int i = 0; i < x.height; ++i)
    for (int j = 0; j < x.width; ++j) {
      const int i2 = along_height ? (i + 1) % x.height : i;
      const int j2 = along_height ? j : (j + 1) % x.width;
      out.at(i, j) = f0 * x.at(i, j) + f1 * x.at(i2, j2);
    }
  return out;
}

DetailCoefficients oracle_swt(const ComplexImage& x) {
  DetailCoefficients c;
  c.subbands[0] = oracle_filter(oracle_filter(x, 0.5, 0.5, false), 0.5, -0.5, true);   // LH
  c.subbands[1] = oracle_filter(oracle_filter(x, 0.5, 0.5, true), 0.5, -0.5, false);   // HL
  c.subbands[2] = oracle_filter(oracle_filter(x, 0.5, -0.5, true), 0.5, -0.5, false);  // HH
  return c;
}

DetailCoefficients random_coeffs(int h, int w, Rng& rng) {
  DetailCoefficients c;
  for (auto& b : c.subbands) b = random_image(h, w, rng);
  return c;
}

double coeff_dot_real(const DetailCoefficients& a, const DetailCoefficients& b) {
  cplx s{0.0, 0.0};
  for (int i = 0; i < 3; ++i) s += dot(a.subbands[i], b.subbands[i]);
  return s.real();
}

}  // namespace

TEST_SUITE("wavelet") {
  TEST_CASE("constant image has exactly zero detail subbands") {
    ComplexImage x(8, 8);
    for (auto& v : x.data) v = cplx{3.25, -1.5};
    const DetailCoefficients c = swt_detail(x);
    for (const auto& band : c.subbands)
      for (const auto& v : band.data) CHECK(v == cplx{0.0, 0.0});
  }

  TEST_CASE("column step activates HL exactly at the transitions") {
    ComplexImage x(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) x.at(i, j) = cplx{j >= 2 ? 1.0 : 0.0, 0.0};
    const DetailCoefficients c = swt_detail(x);
    const DetailCoefficients ref = oracle_swt(x);
    for (int b = 0; b < 3; ++b) CHECK(max_abs_diff(c.subbands[b], ref.subbands[b]) < 1e-15);

    for (int i = 0; i < 4; ++i) {
      CHECK(c.subbands[DetailCoefficients::HL].at(i, 0) == cplx{0.0, 0.0});
      CHECK(std::abs(c.subbands[DetailCoefficients::HL].at(i, 1) - cplx{-0.5, 0.0}) < 1e-15);
      CHECK(c.subbands[DetailCoefficients::HL].at(i, 2) == cplx{0.0, 0.0});
      CHECK(std::abs(c.subbands[DetailCoefficients::HL].at(i, 3) - cplx{0.5, 0.0}) < 1e-15);
      for (int j = 0; j < 4; ++j) {
        CHECK(c.subbands[DetailCoefficients::LH].at(i, j) == cplx{0.0, 0.0});
        CHECK(c.subbands[DetailCoefficients::HH].at(i, j) == cplx{0.0, 0.0});
      }
    }
  }

  TEST_CASE("matches the brute-force oracle on random images") {
    Rng rng(23);
    for (auto [h, w] : {std::pair{4, 4}, {8, 8}, {16, 12}}) {
      const ComplexImage x = random_image(h, w, rng);
      const DetailCoefficients c = swt_detail(x);
      const DetailCoefficients ref = oracle_swt(x);
      for (int b = 0; b < 3; ++b) CHECK(max_abs_diff(c.subbands[b], ref.subbands[b]) < 1e-14);
    }
  }

  TEST_CASE("linearity") {
    Rng rng(29);
    const ComplexImage x = random_image(8, 8, rng);
    const ComplexImage y = random_image(8, 8, rng);
    const cplx a{1.7, -0.3}, b{-0.6, 2.1};
    ComplexImage mix(8, 8);
    for (size_t k = 0; k < mix.data.size(); ++k) mix.data[k] = a * x.data[k] + b * y.data[k];
    const DetailCoefficients cm = swt_detail(mix);
    const DetailCoefficients cx = swt_detail(x);
    const DetailCoefficients cy = swt_detail(y);
    for (int band = 0; band < 3; ++band)
      for (size_t k = 0; k < cm.subbands[band].data.size(); ++k)
        CHECK(std::abs(cm.subbands[band].data[k] - a * cx.subbands[band].data[k] -
                       b * cy.subbands[band].data[k]) < 1e-12);
  }

  TEST_CASE("adjoint dot-test, 100 pairs per shape") {
    Rng rng(31);
    for (auto [h, w] : {std::pair{4, 4}, {8, 8}, {16, 12}}) {
      for (int t = 0; t < 100; ++t) {
        const ComplexImage x = random_image(h, w, rng);
        const DetailCoefficients c = random_coeffs(h, w, rng);
        cplx lhs{0.0, 0.0};
        const DetailCoefficients wx = swt_detail(x);
        for (int b = 0; b < 3; ++b) lhs += dot(wx.subbands[b], c.subbands[b]);
        const cplx rhs = dot(x, swt_detail_adjoint(c));
        double cn = 0.0;
        for (int b = 0; b < 3; ++b) cn += std::pow(norm2(c.subbands[b]), 2);
        CHECK(std::abs(lhs - rhs) / (norm2(x) * std::sqrt(cn)) < 1e-12);
      }
    }
  }

  TEST_CASE("zero coefficients map to the zero image") {
    DetailCoefficients c;
    for (auto& b : c.subbands) b = ComplexImage(6, 6);
    const ComplexImage x = swt_detail_adjoint(c);
    for (const auto& v : x.data) CHECK(v == cplx{0.0, 0.0});
  }

  TEST_CASE("tight frame: W^H W + L^H L = I") {
    Rng rng(37);
    for (auto [h, w] : {std::pair{4, 4}, {8, 8}, {16, 12}}) {
      const ComplexImage x = random_image(h, w, rng);
      const ComplexImage detail_part = swt_detail_adjoint(swt_detail(x));
      const ComplexImage ll_part = swt_ll_adjoint(swt_ll(x));
      ComplexImage sum(h, w);
      for (size_t k = 0; k < sum.data.size(); ++k)
        sum.data[k] = detail_part.data[k] + ll_part.data[k];
      CHECK(max_abs_diff(sum, x) < 1e-12);
    }
  }

  TEST_CASE("minmax_normalize") {
    SUBCASE("scalar evaluation {0,1,4}") {
      std::array<RealImage, 3> m;
      for (auto& b : m) b = RealImage(1, 1);
      m[0].data[0] = 0.0;
      m[1].data[0] = 1.0;
      m[2].data[0] = 4.0;
      const auto n = minmax_normalize(m);
      CHECK(n[0].data[0] == 0.0);
      CHECK(n[1].data[0] == doctest::Approx(0.25).epsilon(1e-15));
      CHECK(n[2].data[0] == 1.0);
    }
    SUBCASE("span [0,5] maps onto exactly [0,1]") {
      Rng rng(41);
      std::array<RealImage, 3> m;
      for (auto& b : m) b = random_real_image(6, 6, rng, 0.2, 4.8);
      m[1].at(2, 3) = 0.0;
      m[2].at(4, 1) = 5.0;
      const auto n = minmax_normalize(m);
      double lo = 1e300, hi = -1e300;
      for (const auto& b : n)
        for (double v : b.data) {
          lo = std::min(lo, v);
          hi = std::max(hi, v);
          CHECK(v >= 0.0);
          CHECK(v <= 1.0);
        }
      CHECK(lo == 0.0);
      CHECK(hi == 1.0);
    }
    SUBCASE("degenerate all-equal input returns zeros") {
      std::array<RealImage, 3> m;
      for (auto& b : m) {
        b = RealImage(3, 3);
        for (auto& v : b.data) v = 2.5;
      }
      const auto n = minmax_normalize(m);
      for (const auto& b : n)
        for (double v : b.data) CHECK(v == 0.0);
    }
  }

  TEST_CASE("images smaller than 2x2 are rejected") {
    ComplexImage x(1, 5);
    CHECK_THROWS_AS((void)swt_detail(x), std::invalid_argument);
  }
}
