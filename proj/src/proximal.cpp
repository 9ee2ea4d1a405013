#include "jeo/proximal.hpp"

#include <cmath>
#include <ostream>

#include "jeo/io_util.hpp"
#include "jeo/rng.hpp"

namespace jeo {

const char* prox_kind_name(ProxKind k) {
  switch (k) {
    case ProxKind::Identity: return "identity";
    case ProxKind::ClassicalShrinkage: return "shrinkage";
    case ProxKind::TinyCnn: return "tiny-cnn";
  }
  return "?";
}

ProxKind prox_kind_from_name(const std::string& name) {
  if (name == "identity") return ProxKind::Identity;
  if (name == "shrinkage") return ProxKind::ClassicalShrinkage;
  if (name == "tiny-cnn") return ProxKind::TinyCnn;
  throw std::invalid_argument("unknown proximal module kind: " + name);
}

ProximalModule ProximalModule::identity(int channels) {
  ProximalModule m;
  m.kind = ProxKind::Identity;
  m.channels = channels;
  return m;
}

ProximalModule ProximalModule::shrinkage(int channels, double threshold) {
  if (threshold <= 0.0) throw std::invalid_argument("shrinkage: threshold must be > 0");
  ProximalModule m;
  m.kind = ProxKind::ClassicalShrinkage;
  m.channels = channels;
  m.threshold = threshold;
  return m;
}

ProximalModule ProximalModule::tiny_cnn(int channels, uint64_t seed) {
  ProximalModule m;
  m.kind = ProxKind::TinyCnn;
  m.channels = channels;
  Rng rng(seed, 0x636e6eULL);
  const auto kaiming = [&](Tensor& w, int fan_in) {
    const double bound = std::sqrt(6.0 / fan_in);
    for (double& v : w.r) v = rng.uniform(-bound, bound);
  };
  Tensor w1 = Tensor::real(kTinyCnnWidth * channels, 3, 3);
  kaiming(w1, channels * 9);
  Tensor w2 = Tensor::real(kTinyCnnWidth * kTinyCnnWidth, 3, 3);
  kaiming(w2, kTinyCnnWidth * 9);
  m.weights.add("conv1_w", std::move(w1));
  m.weights.add("conv1_b", Tensor::real(kTinyCnnWidth, 1, 1));
  m.weights.add("conv2_w", std::move(w2));
  m.weights.add("conv2_b", Tensor::real(kTinyCnnWidth, 1, 1));
  // zero-initialized final layer makes the fresh module an identity
  m.weights.add("conv3_w", Tensor::real(channels * kTinyCnnWidth, 3, 3));
  m.weights.add("conv3_b", Tensor::real(channels, 1, 1));
  return m;
}

int forward(const ProximalModule& m, Tape& tape, int x, const std::vector<int>& params) {
  if (tape.val(x).channels != m.channels)
    throw std::invalid_argument("ProximalModule: input channel mismatch");
  switch (m.kind) {
    case ProxKind::Identity:
      return x;
    case ProxKind::ClassicalShrinkage:
      return tape.shrink_detail(x, m.threshold);
    case ProxKind::TinyCnn: {
      if (params.size() != 6)
        throw std::invalid_argument("ProximalModule: tiny-cnn needs 6 registered arrays");
      int h = tape.conv2d(x, params[0], params[1]);
      h = tape.relu(h);
      h = tape.conv2d(h, params[2], params[3]);
      h = tape.relu(h);
      h = tape.conv2d(h, params[4], params[5]);
      return tape.add(x, h);
    }
  }
  throw std::logic_error("ProximalModule: bad kind");
}

Tensor forward(const ProximalModule& m, const Tensor& x) {
  Tape tape;
  const int in = tape.leaf(x);
  return tape.val(forward(m, tape, in, register_params(m, tape)));
}

std::vector<int> register_params(const ProximalModule& m, Tape& tape) {
  std::vector<int> ids;
  for (const auto& e : m.weights.entries) ids.push_back(tape.leaf(e.value));
  return ids;
}

double positive_param(double raw) { return raw > 30.0 ? raw : std::log1p(std::exp(raw)); }

double positive_param_deriv(double raw) {
  if (raw >= 0.0) return 1.0 / (1.0 + std::exp(-raw));
  const double e = std::exp(raw);
  return e / (1.0 + e);
}

double inverse_positive_param(double y) {
  if (y <= 0.0) throw std::invalid_argument("inverse_positive_param: y must be > 0");
  return y > 30.0 ? y : std::log(std::expm1(y));
}

void write_tensor_set(std::ostream& os, const TensorSet& ts, const std::string& prefix) {
  for (const auto& e : ts.entries) {
    const std::string name = prefix + e.name;
    write_u16(os, static_cast<uint16_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u8(os, 3);  // rank: channels, height, width
    write_u32(os, static_cast<uint32_t>(e.value.channels));
    write_u32(os, static_cast<uint32_t>(e.value.height));
    write_u32(os, static_cast<uint32_t>(e.value.width));
    for (double v : e.value.r) write_f64(os, v);
  }
}

void read_tensor_set(std::istream& is, TensorSet& ts, const std::string& prefix) {
  for (auto& e : ts.entries) {
    const uint16_t len = read_u16(is);
    std::string name(len, '\0');
    is.read(name.data(), len);
    if (!is || name != prefix + e.name)
      throw std::runtime_error("checkpoint: unexpected array " + name);
    const uint8_t rank = read_u8(is);
    if (rank != 3) throw std::runtime_error("checkpoint: unexpected rank");
    const int ch = static_cast<int>(read_u32(is));
    const int h = static_cast<int>(read_u32(is));
    const int w = static_cast<int>(read_u32(is));
    if (ch != e.value.channels || h != e.value.height || w != e.value.width)
      throw std::runtime_error("checkpoint: shape mismatch for " + e.name);
    for (double& v : e.value.r) v = read_f64(is);
  }
}

}  // namespace jeo
