#pragma once

#include "jeo/edge_solver.hpp"
#include "jeo/mri_model.hpp"

namespace jeo {

/// Everything one gradient step on the image subproblem needs.
struct ImageStepInputs {
  const ComplexImage& x;
  const ComplexImage& z;
  const NonEdgeMap& pne;
  const CoilSystem& cs;
  double rho;
  double beta;
  double s;
};

/// Z = idn(x) on the (re, im) two-channel encoding of x.
ComplexImage image_prox(const ComplexImage& x, const ProximalModule& idn);

/// Single gradient step on
///   (1/2) sum_i ||U F S_i x - y_i||^2 + (rho/2) ||P.*Wx||^2 + (beta/2) ||Z - x||^2:
/// x - s [ sum_i S_i^H F^H U^H (U F S_i x - y_i) + rho W^H P^2 (W x) - beta (Z - x) ].
ComplexImage image_step(const ImageStepInputs& in);

/// The no-edge ablation update: image_step with the co-regularizer removed.
ComplexImage image_step_noedge(const ComplexImage& x, const ComplexImage& z, const CoilSystem& cs,
                               double beta, double s);

// Graph builders. x/z are complex 1-channel nodes, pne a real 3-channel
// node; rho/beta/s are scalar nodes; pass pne = -1 (with rho = -1) for the
// no-edge variant.
int image_prox_node(Tape& tape, int x, const ProximalModule& idn, const std::vector<int>& params);
/// wx optionally supplies an already-built swt(x) node (Algorithm 1 reads
/// W x^(k) in both the EO update and this bracket).
int image_step_node(Tape& tape, int x, int z, int pne, const CoilSystem& cs, int rho, int beta,
                    int s, int wx = -1);

/// The data-consistency gradient sum_i S_i^H F^H U^H (U F S_i x - y_i)
/// composed from taped primitives.
int dc_gradient_node(Tape& tape, int x, const CoilSystem& cs);

}  // namespace jeo
