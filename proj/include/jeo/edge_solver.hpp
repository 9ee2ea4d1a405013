#pragma once

#include <array>

#include "jeo/proximal.hpp"
#include "jeo/wavelet.hpp"

namespace jeo {

/// Non-edge probability map P_ne: one channel per detail subband, aligned
/// with DetailCoefficients (LH, HL, HH), every entry in [0,1].
struct NonEdgeMap {
  std::array<RealImage, 3> channels;

  int height() const { return channels[0].height; }
  int width() const { return channels[0].width; }

  /// Min over the three channels; the single-image visualization.
  RealImage min_channel() const;
};

Tensor tensor_from(const NonEdgeMap& p);
NonEdgeMap nonedge_from(const Tensor& t);

/// P_ne^(0) = 1 - N(|W x0|), per channel.
NonEdgeMap init_nonedge_map(const ComplexImage& x0);

/// Closed-form update P = alpha*V / (rho*|Wx|^2 + alpha), elementwise.
NonEdgeMap eo_update(const NonEdgeMap& v, const DetailCoefficients& wx, double alpha, double rho);

/// V = clamp_[0,1](ern(P)).
NonEdgeMap edge_prox(const NonEdgeMap& p, const ProximalModule& ern);

/// Graph builders used by the unrolled pipeline. wx is a complex 3-channel
/// node; alpha/rho are scalar nodes.
int eo_update_node(Tape& tape, int v, int wx, int alpha, int rho);
int edge_prox_node(Tape& tape, int p, const ProximalModule& ern, const std::vector<int>& params);

}  // namespace jeo
