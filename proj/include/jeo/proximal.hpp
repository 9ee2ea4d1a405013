#pragma once

#include <string>
#include <vector>

#include "jeo/tape.hpp"
#include "jeo/tensor.hpp"

namespace jeo {

enum class ProxKind : uint8_t {
  Identity = 0,
  ClassicalShrinkage = 1,
  TinyCnn = 2,
};

const char* prox_kind_name(ProxKind k);
ProxKind prox_kind_from_name(const std::string& name);

/// Learned (or classical) stand-in for a proximal operator. Maps a
/// multi-channel real array to one of identical shape.
///
/// TinyCnn is a residual 3-layer body: conv3x3(C->8) -> ReLU ->
/// conv3x3(8->8) -> ReLU -> conv3x3(8->C), circular padding, added back
/// onto the input. The final conv starts zero so a fresh module is the
/// identity; the other layers use fan-in-scaled (Kaiming) uniform init.
struct ProximalModule {
  ProxKind kind = ProxKind::Identity;
  int channels = 1;  // in == out
  double threshold = 0.05;
  TensorSet weights;

  static ProximalModule identity(int channels);
  static ProximalModule shrinkage(int channels, double threshold);
  static ProximalModule tiny_cnn(int channels, uint64_t seed);
};

inline constexpr int kTinyCnnWidth = 8;

/// Plain forward pass.
Tensor forward(const ProximalModule& m, const Tensor& x);

/// Taped forward pass. `params` must come from register_params on the same
/// tape (empty for identity / shrinkage).
int forward(const ProximalModule& m, Tape& tape, int x, const std::vector<int>& params);

/// Registers the module's weight arrays as tape leaves, in TensorSet order.
std::vector<int> register_params(const ProximalModule& m, Tape& tape);

/// ln(1 + e^raw): smooth strictly positive map for trainable hyperparameters.
double positive_param(double raw);
double positive_param_deriv(double raw);
/// raw value such that positive_param(raw) == y (y > 0).
double inverse_positive_param(double y);

/// JEOW0001 named-array codec (shared by the pipeline checkpoint):
/// per array u16 name length, name bytes, u8 rank, u32 dims, float64 data.
void write_tensor_set(std::ostream& os, const TensorSet& ts, const std::string& prefix = "");
void read_tensor_set(std::istream& is, TensorSet& ts, const std::string& prefix = "");

}  // namespace jeo
