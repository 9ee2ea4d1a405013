#include <functional>
#include <sstream>

#include "doctest.h"
#include "jeo/edge_solver.hpp"
#include "jeo/proximal.hpp"
#include "jeo/wavelet.hpp"
#include "test_util.hpp"

using namespace jeo;
using namespace jeo::test;

namespace {

using GraphBuilder = std::function<int(Tape&, const std::vector<int>&)>;

double eval_loss(const std::vector<Tensor>& leaves, const GraphBuilder& build) {
  Tape t;
  std::vector<int> ids;
  ids.reserve(leaves.size());
  for (const auto& l : leaves) ids.push_back(t.leaf(l));
  return t.val(build(t, ids)).scalar_value();
}

// Central finite difference on one entry of one leaf against the taped
// gradient. tiny_ok passes entries whose gradient is genuinely ~0.
void check_entry(std::vector<Tensor>& leaves, const GraphBuilder& build, const Tape& /*unused*/,
                 double analytic, int li, size_t idx, bool imag_part, double step, double tol) {
  const auto probe = [&](double d) {
    Tensor saved = leaves[li];
    if (leaves[li].is_complex())
      leaves[li].c[idx] += imag_part ? cplx{0.0, d} : cplx{d, 0.0};
    else
      leaves[li].r[idx] += d;
    const double v = eval_loss(leaves, build);
    leaves[li] = std::move(saved);
    return v;
  };
  const double fd = (probe(step) - probe(-step)) / (2.0 * step);
  if (std::abs(fd) < 1e-9 && std::abs(analytic) < 1e-9) {
    CHECK(true);
    return;
  }
  CHECK(rel_err(fd, analytic) < tol);
}

// Randomly probes `probes` entries across all leaves.
void check_gradients(std::vector<Tensor> leaves, const GraphBuilder& build, double step,
                     double tol, int probes, Rng& rng) {
  Tape t;
  std::vector<int> ids;
  for (const auto& l : leaves) ids.push_back(t.leaf(l));
  t.backward(build(t, ids));
  for (int n = 0; n < probes; ++n) {
    const int li = rng.uniform_int(0, static_cast<int>(leaves.size()) - 1);
    if (leaves[li].is_complex()) {
      const size_t idx = rng.uniform_int(0, static_cast<int>(leaves[li].c.size()) - 1);
      const bool im = rng.uniform() < 0.5;
      const cplx gv = t.grad(ids[li]).c[idx];
      check_entry(leaves, build, t, im ? gv.imag() : gv.real(), li, idx, im, step, tol);
    } else {
      const size_t idx = rng.uniform_int(0, static_cast<int>(leaves[li].r.size()) - 1);
      check_entry(leaves, build, t, t.grad(ids[li]).r[idx], li, idx, false, step, tol);
    }
  }
}

Tensor random_real_tensor(int ch, int h, int w, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t = Tensor::real(ch, h, w);
  for (auto& v : t.r) v = rng.uniform(lo, hi);
  return t;
}

Tensor random_complex_tensor(int ch, int h, int w, Rng& rng) {
  Tensor t = Tensor::complex(ch, h, w);
  for (auto& v : t.c) v = cplx(rng.gaussian(), rng.gaussian());
  return t;
}

}  // namespace

TEST_SUITE("autodiff") {
  TEST_CASE("positive_param closed-form values") {
    CHECK(positive_param(0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(positive_param(-20.0) == doctest::Approx(2.0611536e-9).epsilon(1e-6));
    CHECK(positive_param(-20.0) > 0.0);
    CHECK(positive_param_deriv(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(positive_param(inverse_positive_param(1.0)) == doctest::Approx(1.0).epsilon(1e-14));
    // taped softplus agrees with the scalar helpers
    Tape t;
    const int raw = t.leaf(Tensor::scalar(0.37));
    const int sp = t.softplus(raw);
    t.backward(sp);
    CHECK(t.val(sp).scalar_value() == positive_param(0.37));
    CHECK(t.grad(raw).r[0] == doctest::Approx(positive_param_deriv(0.37)).epsilon(1e-14));
  }

  TEST_CASE("conv bias gradient under a sum loss is the pixel count") {
    Rng rng(201);
    std::vector<Tensor> leaves = {random_real_tensor(3, 6, 5, rng),
                                  random_real_tensor(2 * 3, 3, 3, rng),
                                  random_real_tensor(2, 1, 1, rng)};
    Tape t;
    std::vector<int> ids;
    for (const auto& l : leaves) ids.push_back(t.leaf(l));
    t.backward(t.sum_all(t.conv2d(ids[0], ids[1], ids[2])));
    for (int o = 0; o < 2; ++o) CHECK(t.grad(ids[2]).r[o] == doctest::Approx(30.0).epsilon(1e-14));
  }

  TEST_CASE("full tiny-cnn: every parameter gradient matches finite differences") {
    Rng rng(203);
    const int C = 3, W8 = kTinyCnnWidth;
    std::vector<Tensor> leaves = {
        random_real_tensor(C, 8, 8, rng, 0.2, 1.2),        // x
        random_real_tensor(W8 * C, 3, 3, rng, -0.4, 0.4),  // w1
        random_real_tensor(W8, 1, 1, rng, 0.05, 0.3),      // b1
        random_real_tensor(W8 * W8, 3, 3, rng, -0.2, 0.2), // w2
        random_real_tensor(W8, 1, 1, rng, 0.05, 0.3),      // b2
        random_real_tensor(C * W8, 3, 3, rng, -0.3, 0.3),  // w3
        random_real_tensor(C, 1, 1, rng, -0.1, 0.1),       // b3
        random_real_tensor(C, 8, 8, rng),                  // fixed loss weighting
    };
    const GraphBuilder build = [](Tape& t, const std::vector<int>& ids) {
      int h = t.relu(t.conv2d(ids[0], ids[1], ids[2]));
      h = t.relu(t.conv2d(h, ids[3], ids[4]));
      h = t.conv2d(h, ids[5], ids[6]);
      return t.sum_all(t.mul(t.add(ids[0], h), ids[7]));
    };
    Tape t;
    std::vector<int> ids;
    for (const auto& l : leaves) ids.push_back(t.leaf(l));
    t.backward(build(t, ids));
    for (int li = 1; li <= 6; ++li)
      for (size_t idx = 0; idx < leaves[li].r.size(); ++idx)
        check_entry(leaves, build, t, t.grad(ids[li]).r[idx], li, idx, false, 1e-4, 1e-4);
  }

  TEST_CASE("gradient flows through eo_update w.r.t. v, alpha, rho") {
    Rng rng(207);
    std::vector<Tensor> leaves = {
        random_real_tensor(3, 6, 6, rng, 0.0, 1.0),  // v
        random_complex_tensor(3, 6, 6, rng),         // wx
        Tensor::scalar(0.9),                         // alpha
        Tensor::scalar(1.4),                         // rho
        random_real_tensor(3, 6, 6, rng),            // loss weighting
    };
    const GraphBuilder build = [](Tape& t, const std::vector<int>& ids) {
      return t.sum_all(t.mul(eo_update_node(t, ids[0], ids[1], ids[2], ids[3]), ids[4]));
    };
    check_gradients(leaves, build, 1e-6, 1e-5, 60, rng);
  }

  TEST_CASE("complex primitives: fft, ifft, swt, adjoint, mag_sq, rc_scale") {
    Rng rng(209);
    SUBCASE("fft -> mse") {
      std::vector<Tensor> leaves = {random_complex_tensor(1, 8, 8, rng)};
      Tensor target = random_complex_tensor(1, 8, 8, rng);
      const GraphBuilder build = [target](Tape& t, const std::vector<int>& ids) {
        return t.mse_loss(t.fft(ids[0]), target);
      };
      check_gradients(leaves, build, 1e-5, 1e-6, 24, rng);
    }
    SUBCASE("ifft of swt chain") {
      std::vector<Tensor> leaves = {random_complex_tensor(1, 8, 8, rng)};
      Tensor target = random_complex_tensor(1, 8, 8, rng);
      const GraphBuilder build = [target](Tape& t, const std::vector<int>& ids) {
        return t.mse_loss(t.ifft(t.swt_adj(t.swt(ids[0]))), target);
      };
      check_gradients(leaves, build, 1e-5, 1e-6, 24, rng);
    }
    SUBCASE("mag_sq and rc_scale") {
      std::vector<Tensor> leaves = {random_complex_tensor(3, 6, 6, rng),
                                    random_real_tensor(3, 6, 6, rng),
                                    random_real_tensor(3, 6, 6, rng)};
      const GraphBuilder build = [](Tape& t, const std::vector<int>& ids) {
        const int scaled = t.rc_scale(ids[1], ids[0]);
        return t.sum_all(t.mul(t.mag_sq(scaled), ids[2]));
      };
      check_gradients(leaves, build, 1e-5, 1e-5, 40, rng);
    }
    SUBCASE("c2p/p2c round trip is gradient-transparent") {
      std::vector<Tensor> leaves = {random_complex_tensor(1, 6, 6, rng)};
      Tensor target = random_complex_tensor(1, 6, 6, rng);
      const GraphBuilder build = [target](Tape& t, const std::vector<int>& ids) {
        return t.mse_loss(t.p2c(t.c2p(ids[0])), target);
      };
      check_gradients(leaves, build, 1e-5, 1e-6, 16, rng);
    }
  }

  TEST_CASE("real primitives: mul, div, sdiv, smul, sadd, scale, relu, clamp") {
    Rng rng(211);
    SUBCASE("quotients") {
      std::vector<Tensor> leaves = {random_real_tensor(2, 5, 5, rng, 0.5, 2.0),
                                    random_real_tensor(2, 5, 5, rng, 0.8, 3.0),
                                    Tensor::scalar(1.3), random_real_tensor(2, 5, 5, rng)};
      const GraphBuilder build = [](Tape& t, const std::vector<int>& ids) {
        const int q = t.div(ids[0], ids[1]);
        const int r = t.sdiv(ids[2], ids[1]);
        return t.sum_all(t.mul(t.add(q, r), ids[3]));
      };
      check_gradients(leaves, build, 1e-6, 1e-6, 40, rng);
    }
    SUBCASE("broadcast and scale") {
      std::vector<Tensor> leaves = {Tensor::scalar(0.7), random_real_tensor(2, 4, 4, rng),
                                    random_real_tensor(2, 4, 4, rng)};
      const GraphBuilder build = [](Tape& t, const std::vector<int>& ids) {
        const int a = t.smul(ids[0], ids[1]);
        const int b = t.sadd(ids[0], ids[1]);
        return t.sum_all(t.mul(t.scale(t.add(a, b), -1.7), ids[2]));
      };
      check_gradients(leaves, build, 1e-6, 1e-6, 30, rng);
    }
    SUBCASE("relu and clamp away from their kinks") {
      Tensor x = Tensor::real(1, 4, 4);
      Rng r2(212);
      for (auto& v : x.r) {
        v = r2.uniform(-2.0, 2.0);
        if (std::abs(v) < 0.05) v = 0.2;
        if (std::abs(v - 1.0) < 0.05) v = 0.7;
      }
      std::vector<Tensor> leaves = {x, random_real_tensor(1, 4, 4, rng)};
      const GraphBuilder build = [](Tape& t, const std::vector<int>& ids) {
        return t.sum_all(t.mul(t.add(t.relu(ids[0]), t.clamp01(ids[0])), ids[1]));
      };
      check_gradients(leaves, build, 1e-6, 1e-6, 32, rng);
    }
    SUBCASE("relu subgradient at zero is zero; clamp passes at its boundary") {
      Tensor x = Tensor::real(1, 1, 3);
      x.r = {0.0, 1.0, -0.5};
      Tape t;
      const int xi = t.leaf(x);
      t.backward(t.sum_all(t.relu(xi)));
      CHECK(t.grad(xi).r[0] == 0.0);

      Tape t2;
      const int xj = t2.leaf(x);
      t2.backward(t2.sum_all(t2.clamp01(xj)));
      CHECK(t2.grad(xj).r[0] == 1.0);  // boundary value 0 passes gradient
      CHECK(t2.grad(xj).r[1] == 1.0);  // boundary value 1 passes gradient
      CHECK(t2.grad(xj).r[2] == 0.0);
    }
  }

  TEST_CASE("shrinkage module") {
    Rng rng(213);
    SUBCASE("details below the threshold leave only the low-pass part") {
      // A gentle ramp has tiny detail coefficients; a large threshold kills
      // them all, so the output must equal LL^H LL x.
      ComplexImage img(8, 8);
      for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) img.at(i, j) = cplx{1.0 + 0.001 * (i + j), 0.0};
      const ProximalModule m = ProximalModule::shrinkage(1, 10.0);
      Tensor x = Tensor::real(1, 8, 8);
      for (size_t k = 0; k < x.r.size(); ++k) x.r[k] = img.data[k].real();
      const Tensor out = forward(m, x);
      const ComplexImage ll = swt_ll_adjoint(swt_ll(img));
      for (size_t k = 0; k < out.r.size(); ++k)
        CHECK(out.r[k] == doctest::Approx(ll.data[k].real()).epsilon(1e-12));
    }
    SUBCASE("gradient away from the threshold") {
      Tensor x = random_real_tensor(2, 6, 6, rng, -1.0, 1.0);
      std::vector<Tensor> leaves = {x, random_real_tensor(2, 6, 6, rng)};
      const GraphBuilder build = [](Tape& t, const std::vector<int>& ids) {
        return t.sum_all(t.mul(t.shrink_detail(ids[0], 0.037), ids[1]));
      };
      check_gradients(leaves, build, 1e-6, 1e-4, 30, rng);
    }
    SUBCASE("identity module forward") {
      const ProximalModule id = ProximalModule::identity(4);
      Tensor x = random_real_tensor(4, 5, 5, rng);
      const Tensor out = forward(id, x);
      for (size_t k = 0; k < x.r.size(); ++k) CHECK(out.r[k] == x.r[k]);
    }
  }

  TEST_CASE("backward is linear in the loss") {
    Rng rng(215);
    const Tensor x = random_complex_tensor(1, 6, 6, rng);
    const Tensor t1 = random_complex_tensor(1, 6, 6, rng);
    const Tensor t2 = random_complex_tensor(1, 6, 6, rng);
    const double a = 1.7, b = -0.4;

    const auto grad_of = [&](double wa, double wb) {
      Tape t;
      const int xi = t.leaf(x);
      const int l1 = t.mse_loss(t.fft(xi), t1);
      const int l2 = t.mse_loss(t.swt_adj(t.swt(xi)), t2);
      t.backward(t.add(t.scale(l1, wa), t.scale(l2, wb)));
      return t.grad(xi);
    };
    const Tensor ga = grad_of(a, 0.0);
    const Tensor gb = grad_of(0.0, b);
    const Tensor gab = grad_of(a, b);
    for (size_t k = 0; k < gab.c.size(); ++k)
      CHECK(std::abs(gab.c[k] - ga.c[k] - gb.c[k]) < 1e-10);
  }

  TEST_CASE("tensor set checkpoint codec round-trips exactly") {
    Rng rng(217);
    TensorSet ts;
    ts.add("alpha", random_real_tensor(2, 3, 3, rng));
    ts.add("beta", random_real_tensor(1, 1, 1, rng));
    std::stringstream buf;
    write_tensor_set(buf, ts, "m0.");
    TensorSet back;
    back.add("alpha", Tensor::real(2, 3, 3));
    back.add("beta", Tensor::real(1, 1, 1));
    read_tensor_set(buf, back, "m0.");
    for (int e = 0; e < 2; ++e)
      for (size_t k = 0; k < ts.entries[e].value.r.size(); ++k)
        CHECK(back.entries[e].value.r[k] == ts.entries[e].value.r[k]);
  }
}
