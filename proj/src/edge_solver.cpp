#include "jeo/edge_solver.hpp"

#include <cmath>

namespace jeo {

RealImage NonEdgeMap::min_channel() const {
  RealImage out = channels[0];
  for (int b = 1; b < 3; ++b)
    for (size_t k = 0; k < out.data.size(); ++k)
      out.data[k] = std::min(out.data[k], channels[b].data[k]);
  return out;
}

Tensor tensor_from(const NonEdgeMap& p) {
  Tensor t = Tensor::real(3, p.height(), p.width());
  for (int b = 0; b < 3; ++b)
    std::copy(p.channels[b].data.begin(), p.channels[b].data.end(), t.plane_r(b));
  return t;
}

NonEdgeMap nonedge_from(const Tensor& t) {
  if (t.is_complex() || t.channels != 3)
    throw std::invalid_argument("nonedge_from: real 3-channel tensor required");
  NonEdgeMap p;
  for (int b = 0; b < 3; ++b) p.channels[b] = real_image_from(t, b);
  return p;
}

NonEdgeMap init_nonedge_map(const ComplexImage& x0) {
  const DetailCoefficients wx = swt_detail(x0);
  std::array<RealImage, 3> mag;
  for (int b = 0; b < 3; ++b) mag[b] = magnitude(wx.subbands[b]);
  const auto norm = minmax_normalize(mag);
  NonEdgeMap p;
  for (int b = 0; b < 3; ++b) {
    p.channels[b] = RealImage(x0.height, x0.width);
    for (size_t k = 0; k < norm[b].data.size(); ++k) p.channels[b].data[k] = 1.0 - norm[b].data[k];
  }
  return p;
}

NonEdgeMap eo_update(const NonEdgeMap& v, const DetailCoefficients& wx, double alpha, double rho) {
  if (alpha <= 0.0) throw std::invalid_argument("eo_update: alpha must be > 0");
  if (rho < 0.0) throw std::invalid_argument("eo_update: rho must be >= 0");
  NonEdgeMap out;
  for (int b = 0; b < 3; ++b) {
    if (!wx.subbands[b].same_shape(wx.subbands[0]) ||
        v.channels[b].height != wx.subbands[b].height ||
        v.channels[b].width != wx.subbands[b].width)
      throw std::invalid_argument("eo_update: shape mismatch");
    out.channels[b] = RealImage(v.channels[b].height, v.channels[b].width);
    // factor form keeps rho = 0 an exact identity on v
    for (size_t k = 0; k < out.channels[b].data.size(); ++k)
      out.channels[b].data[k] =
          v.channels[b].data[k] * (alpha / (rho * std::norm(wx.subbands[b].data[k]) + alpha));
  }
  return out;
}

NonEdgeMap edge_prox(const NonEdgeMap& p, const ProximalModule& ern) {
  Tape tape;
  const int in = tape.leaf(tensor_from(p));
  const int out = edge_prox_node(tape, in, ern, register_params(ern, tape));
  return nonedge_from(tape.val(out));
}

int eo_update_node(Tape& tape, int v, int wx, int alpha, int rho) {
  const int m = tape.mag_sq(wx);
  const int den = tape.sadd(alpha, tape.smul(rho, m));
  return tape.mul(v, tape.sdiv(alpha, den));
}

int edge_prox_node(Tape& tape, int p, const ProximalModule& ern, const std::vector<int>& params) {
  if (ern.channels != 3)
    throw std::invalid_argument("edge_prox: ERN must be a 3-channel module");
  return tape.clamp01(forward(ern, tape, p, params));
}

}  // namespace jeo
