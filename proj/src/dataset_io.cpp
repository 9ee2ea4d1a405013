#include <cmath>
#include <cstring>
#include <fstream>

#include "jeo/io_util.hpp"
#include "jeo/mri_model.hpp"

namespace jeo {

namespace {

constexpr char kMagic[8] = {'J', 'E', 'O', 'M', 'R', 'I', '0', '1'};

void write_complex_image(std::ostream& os, const ComplexImage& img) {
  for (const cplx& v : img.data) {
    write_f32(os, static_cast<float>(v.real()));
    write_f32(os, static_cast<float>(v.imag()));
  }
}

ComplexImage read_complex_image(std::istream& is, int h, int w) {
  ComplexImage img(h, w);
  for (cplx& v : img.data) {
    const double re = read_f32(is);
    const double im = read_f32(is);
    v = cplx(re, im);
  }
  return img;
}

}  // namespace

void save_dataset(const std::string& path, const Dataset& ds) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os.write(kMagic, sizeof(kMagic));
  write_u32(os, static_cast<uint32_t>(ds.samples.size()));
  write_u32(os, static_cast<uint32_t>(ds.height()));
  write_u32(os, static_cast<uint32_t>(ds.width()));
  write_u32(os, static_cast<uint32_t>(ds.coils()));
  for (const Sample& s : ds.samples) {
    write_complex_image(os, s.gt);
    for (const auto& m : s.cs.sens) write_complex_image(os, m);
    for (uint8_t v : s.cs.mask.pattern) write_u8(os, v);
    for (const auto& k : s.cs.kspace) write_complex_image(os, k);
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("not a JEOMRI01 container: " + path);
  const uint32_t n_samples = read_u32(is);
  const int h = static_cast<int>(read_u32(is));
  const int w = static_cast<int>(read_u32(is));
  const int n_coils = static_cast<int>(read_u32(is));
  if (h <= 0 || w <= 0 || n_coils <= 0) throw std::runtime_error("corrupt container header");

  Dataset ds;
  ds.samples.reserve(n_samples);
  for (uint32_t s = 0; s < n_samples; ++s) {
    Sample sample;
    sample.gt = read_complex_image(is, h, w);
    sample.cs.n = n_coils;
    for (int c = 0; c < n_coils; ++c) sample.cs.sens.push_back(read_complex_image(is, h, w));
    sample.cs.mask.height = h;
    sample.cs.mask.width = w;
    sample.cs.mask.pattern.resize(static_cast<size_t>(h) * w);
    for (auto& v : sample.cs.mask.pattern) v = read_u8(is);
    for (int c = 0; c < n_coils; ++c) sample.cs.kspace.push_back(read_complex_image(is, h, w));

    // float32 storage perturbs the map normalization; restore it exactly.
    for (size_t p = 0; p < sample.cs.sens[0].data.size(); ++p) {
      double sum = 0.0;
      for (int c = 0; c < n_coils; ++c) sum += std::norm(sample.cs.sens[c].data[p]);
      if (sum > 0.0) {
        const double inv = 1.0 / std::sqrt(sum);
        for (int c = 0; c < n_coils; ++c) sample.cs.sens[c].data[p] *= inv;
      }
    }
    // Masked k-space values also survive the quantization exactly at zero,
    // so the off-mask invariant is intact; enforce it anyway.
    for (int c = 0; c < n_coils; ++c)
      for (size_t p = 0; p < sample.cs.kspace[c].data.size(); ++p)
        if (!sample.cs.mask.pattern[p]) sample.cs.kspace[c].data[p] = cplx{0.0, 0.0};
    ds.samples.push_back(std::move(sample));
  }
  return ds;
}

}  // namespace jeo
