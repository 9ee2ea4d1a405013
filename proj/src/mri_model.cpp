#include "jeo/mri_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "jeo/fft.hpp"
#include "jeo/rng.hpp"

namespace jeo {

namespace {

ComplexImage apply_mask(const SamplingMask& mask, const ComplexImage& k) {
  ComplexImage out(k.height, k.width);
  for (size_t i = 0; i < k.data.size(); ++i)
    out.data[i] = mask.pattern[i] ? k.data[i] : cplx{0.0, 0.0};
  return out;
}

int acs_start(int width, int acs_lines) { return (width - acs_lines) / 2; }

void fill_columns(SamplingMask& m, const std::vector<uint8_t>& cols) {
  for (int i = 0; i < m.height; ++i)
    for (int j = 0; j < m.width; ++j) m.pattern[static_cast<size_t>(i) * m.width + j] = cols[j];
}

}  // namespace

const char* mask_scheme_name(MaskScheme s) {
  switch (s) {
    case MaskScheme::CartesianRandomLines: return "cartesian";
    case MaskScheme::CartesianEquidistantLines: return "equidistant";
    case MaskScheme::RandomPointwise: return "random";
  }
  return "?";
}

MaskScheme mask_scheme_from_name(const std::string& name) {
  if (name == "cartesian") return MaskScheme::CartesianRandomLines;
  if (name == "equidistant") return MaskScheme::CartesianEquidistantLines;
  if (name == "random") return MaskScheme::RandomPointwise;
  throw std::invalid_argument("unknown sampling scheme: " + name);
}

size_t SamplingMask::sampled_count() const {
  size_t c = 0;
  for (uint8_t v : pattern) c += v;
  return c;
}

void CoilSystem::validate() const {
  if (n < 1) throw std::invalid_argument("CoilSystem: coil count must be >= 1");
  if (static_cast<int>(sens.size()) != n || static_cast<int>(kspace.size()) != n)
    throw std::invalid_argument("CoilSystem: coil array count mismatch");
  const int h = mask.height, w = mask.width;
  for (int i = 0; i < n; ++i) {
    if (sens[i].height != h || sens[i].width != w || kspace[i].height != h ||
        kspace[i].width != w)
      throw std::invalid_argument("CoilSystem: shape mismatch");
  }
  for (size_t p = 0; p < sens[0].data.size(); ++p) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += std::norm(sens[i].data[p]);
    if (std::abs(s - 1.0) > 1e-10)
      throw std::invalid_argument("CoilSystem: sensitivity maps not normalized");
  }
  for (int i = 0; i < n; ++i)
    for (size_t p = 0; p < kspace[i].data.size(); ++p)
      if (!mask.pattern[p] && kspace[i].data[p] != cplx{0.0, 0.0})
        throw std::invalid_argument("CoilSystem: k-space energy off the sampling mask");
}

SamplingMask make_mask(MaskScheme scheme, int height, int width, double acceleration,
                       int acs_lines, uint64_t seed) {
  if (height <= 0 || width <= 0) throw std::invalid_argument("make_mask: bad shape");
  if (acceleration < 1.0) throw std::invalid_argument("make_mask: acceleration must be >= 1");
  if (acs_lines < 0 || acs_lines >= width)
    throw std::invalid_argument("make_mask: acs_lines must be in [0, width)");

  SamplingMask m;
  m.height = height;
  m.width = width;
  m.pattern.assign(static_cast<size_t>(height) * width, 0);
  m.scheme = scheme;
  m.acceleration = acceleration;
  m.acs_lines = acs_lines;

  if (acceleration == 1.0) {
    std::fill(m.pattern.begin(), m.pattern.end(), uint8_t{1});
    return m;
  }

  const int a0 = acs_start(width, acs_lines);
  Rng rng(seed, 0x6d61736bULL);

  if (scheme == MaskScheme::CartesianEquidistantLines) {
    const int step = std::max(1, static_cast<int>(std::lround(acceleration)));
    std::vector<uint8_t> cols(width, 0);
    for (int j = 0; j < width; j += step) cols[j] = 1;
    for (int j = a0; j < a0 + acs_lines; ++j) cols[j] = 1;
    fill_columns(m, cols);
  } else if (scheme == MaskScheme::CartesianRandomLines) {
    const auto budget = static_cast<size_t>(std::lround(width / acceleration));
    if (budget < static_cast<size_t>(acs_lines))
      throw std::invalid_argument("make_mask: line budget smaller than ACS region");
    std::vector<uint8_t> cols(width, 0);
    for (int j = a0; j < a0 + acs_lines; ++j) cols[j] = 1;
    std::vector<int> pool;
    for (int j = 0; j < width; ++j)
      if (!cols[j]) pool.push_back(j);
    size_t have = acs_lines;
    while (have < budget && !pool.empty()) {
      const int pick = rng.uniform_int(0, static_cast<int>(pool.size()) - 1);
      cols[pool[pick]] = 1;
      pool.erase(pool.begin() + pick);
      ++have;
    }
    fill_columns(m, cols);
  } else {
    const auto budget =
        static_cast<size_t>(std::lround(static_cast<double>(height) * width / acceleration));
    const size_t acs_px = static_cast<size_t>(acs_lines) * height;
    if (budget < acs_px)
      throw std::invalid_argument("make_mask: sample budget smaller than ACS region");
    for (int i = 0; i < height; ++i)
      for (int j = a0; j < a0 + acs_lines; ++j) m.pattern[static_cast<size_t>(i) * width + j] = 1;
    std::vector<size_t> pool;
    for (size_t p = 0; p < m.pattern.size(); ++p)
      if (!m.pattern[p]) pool.push_back(p);
    size_t have = acs_px;
    while (have < budget && !pool.empty()) {
      const int pick = rng.uniform_int(0, static_cast<int>(pool.size()) - 1);
      m.pattern[pool[pick]] = 1;
      pool.erase(pool.begin() + pick);
      ++have;
    }
  }
  return m;
}

std::vector<ComplexImage> make_sensitivities(int height, int width, int n, uint64_t seed) {
  if (n < 1) throw std::invalid_argument("make_sensitivities: n must be >= 1");
  std::vector<ComplexImage> sens(n, ComplexImage(height, width));
  if (n == 1) {
    for (auto& v : sens[0].data) v = cplx{1.0, 0.0};
    return sens;
  }
  Rng rng(seed, 0x73656e73ULL);
  const double sigma = 0.5 * std::max(height, width);
  for (int c = 0; c < n; ++c) {
    const double theta = 2.0 * std::numbers::pi * c / n + rng.uniform(-0.1, 0.1);
    const double ci = 0.5 * height + 0.55 * height * std::sin(theta);
    const double cj = 0.5 * width + 0.55 * width * std::cos(theta);
    const double pa = rng.uniform(-std::numbers::pi / 2, std::numbers::pi / 2);
    const double pb = rng.uniform(-std::numbers::pi / 2, std::numbers::pi / 2);
    for (int i = 0; i < height; ++i)
      for (int j = 0; j < width; ++j) {
        const double d2 = (i - ci) * (i - ci) + (j - cj) * (j - cj);
        const double mag = std::exp(-d2 / (2.0 * sigma * sigma));
        const double ph = pa * (j - 0.5 * width) / width + pb * (i - 0.5 * height) / height;
        sens[c].at(i, j) = mag * cplx(std::cos(ph), std::sin(ph));
      }
  }
  for (size_t p = 0; p < sens[0].data.size(); ++p) {
    double s = 0.0;
    for (int c = 0; c < n; ++c) s += std::norm(sens[c].data[p]);
    const double inv = 1.0 / std::sqrt(s);
    for (int c = 0; c < n; ++c) sens[c].data[p] *= inv;
  }
  return sens;
}

ComplexImage sense_forward(const ComplexImage& x, const CoilSystem& cs, int coil) {
  if (coil < 0 || coil >= cs.n) throw std::out_of_range("sense_forward: coil index");
  if (!x.same_shape(cs.sens[coil])) throw std::invalid_argument("sense_forward: shape mismatch");
  ComplexImage sx(x.height, x.width);
  for (size_t p = 0; p < x.data.size(); ++p) sx.data[p] = cs.sens[coil].data[p] * x.data[p];
  return apply_mask(cs.mask, fft2c(sx));
}

ComplexImage sense_adjoint(const ComplexImage& k, const CoilSystem& cs, int coil) {
  if (coil < 0 || coil >= cs.n) throw std::out_of_range("sense_adjoint: coil index");
  if (k.height != cs.height() || k.width != cs.width())
    throw std::invalid_argument("sense_adjoint: shape mismatch");
  ComplexImage img = ifft2c(apply_mask(cs.mask, k));
  for (size_t p = 0; p < img.data.size(); ++p) img.data[p] *= std::conj(cs.sens[coil].data[p]);
  return img;
}

ComplexImage dc_gradient(const ComplexImage& x, const CoilSystem& cs) {
  ComplexImage grad(x.height, x.width);
  for (int i = 0; i < cs.n; ++i) {
    ComplexImage r = sense_forward(x, cs, i);
    for (size_t p = 0; p < r.data.size(); ++p) r.data[p] -= cs.kspace[i].data[p];
    const ComplexImage gi = sense_adjoint(r, cs, i);
    for (size_t p = 0; p < grad.data.size(); ++p) grad.data[p] += gi.data[p];
  }
  return grad;
}

ComplexImage zero_filled_init(const CoilSystem& cs) {
  ComplexImage x(cs.height(), cs.width());
  for (int i = 0; i < cs.n; ++i) {
    const ComplexImage img = ifft2c(cs.kspace[i]);
    for (size_t p = 0; p < x.data.size(); ++p)
      x.data[p] += std::conj(cs.sens[i].data[p]) * img.data[p];
  }
  return x;
}

CoilSystem synthesize_acquisition(const ComplexImage& gt, int n, const SamplingMask& mask,
                                  double noise_std, uint64_t seed) {
  if (noise_std < 0.0) throw std::invalid_argument("synthesize_acquisition: noise_std < 0");
  if (gt.height != mask.height || gt.width != mask.width)
    throw std::invalid_argument("synthesize_acquisition: mask/image shape mismatch");
  CoilSystem cs;
  cs.n = n;
  cs.mask = mask;
  cs.sens = make_sensitivities(gt.height, gt.width, n, seed);
  cs.kspace.reserve(n);
  Rng rng(seed, 0x6e6f6973ULL);
  for (int i = 0; i < n; ++i) {
    ComplexImage sx(gt.height, gt.width);
    for (size_t p = 0; p < gt.data.size(); ++p) sx.data[p] = cs.sens[i].data[p] * gt.data[p];
    ComplexImage k = fft2c(sx);
    if (noise_std > 0.0)
      for (auto& v : k.data) v += cplx(noise_std * rng.gaussian(), noise_std * rng.gaussian());
    cs.kspace.push_back(apply_mask(mask, k));
  }
  return cs;
}

ComplexImage make_phantom(int height, int width, uint64_t seed) {
  Rng rng(seed, 0x7068616eULL);
  struct Ellipse {
    double ci, cj, a, b, theta, val;
  };
  std::vector<Ellipse> shapes;
  shapes.push_back({rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05), rng.uniform(0.75, 0.92),
                    rng.uniform(0.75, 0.92), rng.uniform(-0.3, 0.3), rng.uniform(0.55, 0.75)});
  const int inner = rng.uniform_int(3, 7);
  for (int k = 0; k < inner; ++k) {
    const double r = rng.uniform(0.0, 0.55);
    const double ang = rng.uniform(0.0, 2.0 * std::numbers::pi);
    shapes.push_back({r * std::sin(ang), r * std::cos(ang), rng.uniform(0.08, 0.40),
                      rng.uniform(0.08, 0.40), rng.uniform(0.0, std::numbers::pi),
                      rng.uniform(-0.35, 0.45)});
  }
  const double pa = rng.uniform(-std::numbers::pi / 3, std::numbers::pi / 3);
  const double pb = rng.uniform(-std::numbers::pi / 3, std::numbers::pi / 3);

  ComplexImage img(height, width);
  for (int i = 0; i < height; ++i) {
    const double v = (2.0 * i - height) / height;
    for (int j = 0; j < width; ++j) {
      const double u = (2.0 * j - width) / width;
      double val = 0.0;
      for (const auto& e : shapes) {
        const double du = u - e.cj, dv = v - e.ci;
        const double ct = std::cos(e.theta), st = std::sin(e.theta);
        const double p = du * ct + dv * st, q = -du * st + dv * ct;
        if (p * p / (e.a * e.a) + q * q / (e.b * e.b) <= 1.0) val += e.val;
      }
      val = std::clamp(val, 0.0, 1.0);
      const double ph = pa * u / 2.0 + pb * v / 2.0;
      img.at(i, j) = val * cplx(std::cos(ph), std::sin(ph));
    }
  }
  return img;
}

}  // namespace jeo
