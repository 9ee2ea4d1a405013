#include "jeo/tensor.hpp"

#include <algorithm>
#include <stdexcept>

namespace jeo {

Tensor tensor_from(const ComplexImage& img) {
  Tensor t = Tensor::complex(1, img.height, img.width);
  t.c = img.data;
  return t;
}

Tensor tensor_from(const RealImage& img) {
  Tensor t = Tensor::real_uninit(1, img.height, img.width);
  t.r.assign(img.data.begin(), img.data.end());
  return t;
}

ComplexImage image_from(const Tensor& t, int channel) {
  if (!t.is_complex()) throw std::invalid_argument("image_from: tensor is not complex");
  ComplexImage img(t.height, t.width);
  std::copy_n(t.plane_c(channel), t.plane(), img.data.begin());
  return img;
}

RealImage real_image_from(const Tensor& t, int channel) {
  if (t.is_complex()) throw std::invalid_argument("real_image_from: tensor is complex");
  RealImage img(t.height, t.width);
  std::copy_n(t.plane_r(channel), t.plane(), img.data.begin());
  return img;
}

Tensor& TensorSet::add(const std::string& name, Tensor v) {
  Entry e;
  e.name = name;
  e.grad = v.zeros_like();
  e.value = std::move(v);
  entries.push_back(std::move(e));
  return entries.back().value;
}

TensorSet::Entry& TensorSet::at(const std::string& name) {
  for (auto& e : entries)
    if (e.name == name) return e;
  throw std::out_of_range("TensorSet: no array named " + name);
}

const TensorSet::Entry& TensorSet::at(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return e;
  throw std::out_of_range("TensorSet: no array named " + name);
}

void TensorSet::zero_grads() {
  for (auto& e : entries) {
    std::fill(e.grad.r.begin(), e.grad.r.end(), 0.0);
    std::fill(e.grad.c.begin(), e.grad.c.end(), cplx{0.0, 0.0});
  }
}

}  // namespace jeo
