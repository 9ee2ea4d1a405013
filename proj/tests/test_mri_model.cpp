#include <cstdio>
#include <set>

#include "doctest.h"
#include "jeo/fft.hpp"
#include "jeo/metrics.hpp"
#include "jeo/mri_model.hpp"
#include "test_util.hpp"

using namespace jeo;
using namespace jeo::test;

namespace {

// Test-local fidelity objective: (1/2) sum_i ||U F S_i x - y_i||^2,
// assembled independently of dc_gradient.
double fidelity_objective(const ComplexImage& x, const CoilSystem& cs) {
  double acc = 0.0;
  for (int i = 0; i < cs.n; ++i) {
    ComplexImage sx(x.height, x.width);
    for (size_t p = 0; p < x.data.size(); ++p) sx.data[p] = cs.sens[i].data[p] * x.data[p];
    const ComplexImage k = fft2c(sx);
    for (size_t p = 0; p < k.data.size(); ++p) {
      const cplx r = (cs.mask.pattern[p] ? k.data[p] : cplx{0.0, 0.0}) - cs.kspace[i].data[p];
      acc += 0.5 * std::norm(r);
    }
  }
  return acc;
}

CoilSystem noiseless_system(const ComplexImage& gt, int coils, const SamplingMask& mask,
                            uint64_t seed) {
  return synthesize_acquisition(gt, coils, mask, 0.0, seed);
}

}  // namespace

TEST_SUITE("mri_model") {
  TEST_CASE("equidistant mask samples exact columns") {
    const SamplingMask m = make_mask(MaskScheme::CartesianEquidistantLines, 8, 64, 4.0, 0, 1);
    for (int j = 0; j < 64; ++j)
      for (int i = 0; i < 8; ++i) CHECK(m.at(i, j) == (j % 4 == 0 ? 1 : 0));
  }

  TEST_CASE("random-line mask hits the exact budget and includes ACS") {
    const SamplingMask m = make_mask(MaskScheme::CartesianRandomLines, 8, 64, 4.0, 8, 5);
    std::set<int> cols;
    for (int j = 0; j < 64; ++j) {
      bool any = false, all = true;
      for (int i = 0; i < 8; ++i) {
        any |= m.at(i, j) != 0;
        all &= m.at(i, j) != 0;
      }
      CHECK(any == all);  // line sampling: columns are all-0 or all-1
      if (any) cols.insert(j);
    }
    CHECK(cols.size() == 16);
    for (int j = 28; j < 36; ++j) CHECK(cols.count(j) == 1);
  }

  TEST_CASE("R=1 gives the all-ones mask for every scheme") {
    for (auto scheme : {MaskScheme::CartesianRandomLines, MaskScheme::CartesianEquidistantLines,
                        MaskScheme::RandomPointwise}) {
      const SamplingMask m = make_mask(scheme, 6, 10, 1.0, 2, 9);
      for (uint8_t v : m.pattern) CHECK(v == 1);
    }
  }

  TEST_CASE("pointwise budget is exact and deterministic in the seed") {
    const SamplingMask a = make_mask(MaskScheme::RandomPointwise, 32, 32, 4.0, 2, 42);
    const SamplingMask b = make_mask(MaskScheme::RandomPointwise, 32, 32, 4.0, 2, 42);
    CHECK(a.pattern == b.pattern);
    CHECK(a.sampled_count() == 256);  // 32*32/4
    const SamplingMask c = make_mask(MaskScheme::RandomPointwise, 32, 32, 4.0, 2, 43);
    CHECK(a.pattern != c.pattern);
  }

  TEST_CASE("budget below the ACS region is rejected") {
    CHECK_THROWS_AS((void)make_mask(MaskScheme::CartesianRandomLines, 8, 64, 40.0, 8, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)make_mask(MaskScheme::RandomPointwise, 64, 64, 40.0, 8, 1),
                    std::invalid_argument);
  }

  TEST_CASE("single-coil sensitivity degenerates to 1") {
    const auto sens = make_sensitivities(8, 8, 1, 3);
    for (const auto& v : sens[0].data) CHECK(std::abs(std::abs(v) - 1.0) < 1e-15);
  }

  TEST_CASE("multi-coil maps are normalized and deterministic") {
    const auto a = make_sensitivities(16, 12, 4, 3);
    const auto b = make_sensitivities(16, 12, 4, 3);
    for (int c = 0; c < 4; ++c) CHECK(max_abs_diff(a[c], b[c]) == 0.0);
    for (size_t p = 0; p < a[0].data.size(); ++p) {
      double s = 0.0;
      for (int c = 0; c < 4; ++c) s += std::norm(a[c].data[p]);
      CHECK(std::abs(s - 1.0) < 1e-12);
    }
  }

  TEST_CASE("sense_forward reduces to fft2c for the trivial system") {
    Rng rng(51);
    const ComplexImage gt = random_image(8, 8, rng);
    const SamplingMask full = make_mask(MaskScheme::RandomPointwise, 8, 8, 1.0, 0, 1);
    const CoilSystem cs = noiseless_system(gt, 1, full, 1);
    const ComplexImage x = random_image(8, 8, rng);
    CHECK(max_abs_diff(sense_forward(x, cs, 0), fft2c(x)) < 1e-14);

    ComplexImage zero(8, 8);
    const ComplexImage fz = sense_forward(zero, cs, 0);
    for (const auto& v : fz.data) CHECK(std::abs(v) < 1e-15);
  }

  TEST_CASE("sense_forward is exactly zero off the mask") {
    Rng rng(53);
    const ComplexImage gt = make_phantom(16, 16, 5);
    const SamplingMask m = make_mask(MaskScheme::RandomPointwise, 16, 16, 4.0, 1, 7);
    const CoilSystem cs = noiseless_system(gt, 3, m, 2);
    const ComplexImage x = random_image(16, 16, rng);
    for (int i = 0; i < 3; ++i) {
      const ComplexImage k = sense_forward(x, cs, i);
      for (size_t p = 0; p < k.data.size(); ++p)
        if (!m.pattern[p]) CHECK(k.data[p] == cplx{0.0, 0.0});
    }
  }

  TEST_CASE("sense adjoint dot-test, multi-coil") {
    Rng rng(59);
    const ComplexImage gt = make_phantom(16, 16, 6);
    const SamplingMask m = make_mask(MaskScheme::CartesianRandomLines, 16, 16, 2.0, 2, 3);
    const CoilSystem cs = noiseless_system(gt, 4, m, 4);
    for (int t = 0; t < 100; ++t) {
      const ComplexImage x = random_image(16, 16, rng);
      const ComplexImage y = random_image(16, 16, rng);
      for (int i = 0; i < 4; ++i) {
        const cplx lhs = dot(sense_forward(x, cs, i), y);
        const cplx rhs = dot(x, sense_adjoint(y, cs, i));
        CHECK(std::abs(lhs - rhs) / (norm2(x) * norm2(y)) < 1e-12);
      }
    }
    CHECK_THROWS_AS((void)sense_forward(random_image(16, 16, rng), cs, 4), std::out_of_range);
  }

  TEST_CASE("dc_gradient vanishes on consistent full-mask data") {
    const ComplexImage gt = make_phantom(16, 16, 7);
    const SamplingMask full = make_mask(MaskScheme::RandomPointwise, 16, 16, 1.0, 0, 1);
    const CoilSystem cs = noiseless_system(gt, 4, full, 5);
    const ComplexImage g = dc_gradient(gt, cs);
    for (const auto& v : g.data) CHECK(std::abs(v) < 1e-10);
  }

  TEST_CASE("dc_gradient matches central finite differences") {
    Rng rng(61);
    const ComplexImage gt = make_phantom(8, 8, 8);
    const SamplingMask m = make_mask(MaskScheme::RandomPointwise, 8, 8, 2.0, 1, 11);
    const CoilSystem cs = noiseless_system(gt, 2, m, 6);
    ComplexImage x = random_image(8, 8, rng);
    const ComplexImage g = dc_gradient(x, cs);
    const double h = 1e-5;
    for (int p : {0, 9, 17, 33, 63}) {
      const auto probe = [&](bool imag_part) {
        const double fd = central_diff(
            [&](double t) {
              ComplexImage xt = x;
              xt.data[p] += imag_part ? cplx{0.0, t} : cplx{t, 0.0};
              return fidelity_objective(xt, cs);
            },
            0.0, h);
        const double an = imag_part ? g.data[p].imag() : g.data[p].real();
        CHECK(rel_err(fd, an) < 1e-6);
      };
      probe(false);
      probe(true);
    }
  }

  TEST_CASE("dc_gradient with zero data and full mask is the identity") {
    Rng rng(67);
    const ComplexImage gt = make_phantom(8, 8, 9);
    const SamplingMask full = make_mask(MaskScheme::RandomPointwise, 8, 8, 1.0, 0, 1);
    CoilSystem cs = noiseless_system(gt, 3, full, 7);
    for (auto& k : cs.kspace) k = ComplexImage(8, 8);
    const ComplexImage x = random_image(8, 8, rng);
    CHECK(max_abs_diff(dc_gradient(x, cs), x) < 1e-10);
  }

  TEST_CASE("zero-filled init recovers ground truth at full sampling") {
    const ComplexImage gt = make_phantom(16, 16, 10);
    const SamplingMask full = make_mask(MaskScheme::RandomPointwise, 16, 16, 1.0, 0, 1);
    const CoilSystem cs = noiseless_system(gt, 4, full, 8);
    const ComplexImage x0 = zero_filled_init(cs);
    double scale = 0.0;
    for (const auto& v : gt.data) scale = std::max(scale, std::abs(v));
    CHECK(max_abs_diff(x0, gt) / scale < 1e-10);
  }

  TEST_CASE("zero k-space gives a zero init") {
    const ComplexImage gt = make_phantom(8, 8, 11);
    const SamplingMask full = make_mask(MaskScheme::RandomPointwise, 8, 8, 1.0, 0, 1);
    CoilSystem cs = noiseless_system(gt, 2, full, 9);
    for (auto& k : cs.kspace) k = ComplexImage(8, 8);
    const ComplexImage x0 = zero_filled_init(cs);
    for (const auto& v : x0.data) CHECK(v == cplx{0.0, 0.0});
  }

  TEST_CASE("undersampling degrades the zero-filled PSNR") {
    const ComplexImage gt = make_phantom(32, 32, 12);
    const SamplingMask full = make_mask(MaskScheme::RandomPointwise, 32, 32, 1.0, 0, 1);
    const SamplingMask r4 = make_mask(MaskScheme::RandomPointwise, 32, 32, 4.0, 2, 13);
    const CoilSystem cs_full = noiseless_system(gt, 4, full, 10);
    const CoilSystem cs_r4 = noiseless_system(gt, 4, r4, 10);
    const double p_full = psnr(magnitude(zero_filled_init(cs_full)), magnitude(gt));
    const double p_r4 = psnr(magnitude(zero_filled_init(cs_r4)), magnitude(gt));
    CHECK(p_r4 < p_full);
    CHECK(std::isfinite(p_r4));
  }

  TEST_CASE("synthesize_acquisition basics") {
    const ComplexImage gt = make_phantom(8, 8, 13);
    const SamplingMask full = make_mask(MaskScheme::RandomPointwise, 8, 8, 1.0, 0, 1);
    const CoilSystem cs = synthesize_acquisition(gt, 1, full, 0.0, 3);
    CHECK(max_abs_diff(cs.kspace[0], fft2c(gt)) < 1e-14);

    const SamplingMask m = make_mask(MaskScheme::RandomPointwise, 8, 8, 2.0, 1, 17);
    const CoilSystem noisy = synthesize_acquisition(gt, 3, m, 0.05, 4);
    noisy.validate();
    const CoilSystem again = synthesize_acquisition(gt, 3, m, 0.05, 4);
    for (int i = 0; i < 3; ++i) CHECK(max_abs_diff(noisy.kspace[i], again.kspace[i]) == 0.0);
  }

  TEST_CASE("masks are idempotent projections") {
    const SamplingMask m = make_mask(MaskScheme::RandomPointwise, 8, 8, 2.0, 1, 19);
    for (uint8_t v : m.pattern) CHECK(v * v == v);
  }

  TEST_CASE("dataset container round-trips through float32 storage") {
    Dataset ds;
    for (int i = 0; i < 3; ++i) {
      Sample s;
      s.gt = make_phantom(16, 16, 100 + i);
      const SamplingMask m = make_mask(MaskScheme::RandomPointwise, 16, 16, 2.0, 1, 200 + i);
      s.cs = synthesize_acquisition(s.gt, 2, m, 0.01, 300 + i);
      ds.samples.push_back(std::move(s));
    }
    const std::string path = "test_roundtrip.jeomri";
    save_dataset(path, ds);
    const Dataset back = load_dataset(path);
    REQUIRE(back.samples.size() == 3);
    for (int i = 0; i < 3; ++i) {
      back.samples[i].cs.validate();
      CHECK(max_abs_diff(back.samples[i].gt, ds.samples[i].gt) < 1e-6);
      CHECK(back.samples[i].cs.mask.pattern == ds.samples[i].cs.mask.pattern);
      for (int c = 0; c < 2; ++c)
        CHECK(max_abs_diff(back.samples[i].cs.kspace[c], ds.samples[i].cs.kspace[c]) < 1e-5);
    }
    std::remove(path.c_str());
  }
}
