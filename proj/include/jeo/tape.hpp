#pragma once

#include <vector>

#include "jeo/tensor.hpp"

namespace jeo {

/// Reverse-mode tape over array-valued primitives. Builder calls evaluate
/// eagerly and append a node; backward() sweeps the record in exact reverse
/// order, so anything built through the tape is differentiable end to end.
class Tape {
public:
  /// Inputs and trainable parameters enter as leaves.
  int leaf(Tensor v);

  // -- real ops ------------------------------------------------------
  /// 3x3 convolution with circular padding. weight layout:
  /// channels = out_ch * in_ch (index o*in_ch + c), 3x3 planes; bias (out_ch,1,1).
  int conv2d(int x, int weight, int bias);
  int relu(int x);
  /// Clamp to [0,1]; gradient passes at the boundary values themselves.
  int clamp01(int x);
  int mul(int a, int b);
  int div(int a, int b);
  /// Broadcast scalar node times tensor node (real or complex tensor).
  int smul(int s, int t);
  /// Broadcast scalar node plus real tensor node.
  int sadd(int s, int t);
  /// Broadcast scalar node divided by real tensor node, elementwise.
  int sdiv(int s, int t);
  int softplus(int x);
  /// Soft-threshold in the stationary-Haar detail domain, per channel,
  /// with the residual low-pass part kept: x -> x + W^H(shrink(Wx) - Wx).
  int shrink_detail(int x, double threshold);

  // -- kind-generic ops ----------------------------------------------
  int add(int a, int b);
  int sub(int a, int b);
  /// Multiply by a compile-time-constant scalar (loss weights, negation).
  int scale(int a, double k);

  // -- complex ops ----------------------------------------------------
  int fft(int a);
  int ifft(int a);
  int swt(int a);      // complex 1ch -> detail subbands as complex 3ch
  int swt_adj(int a);  // complex 3ch -> complex 1ch
  /// Elementwise multiply by a constant complex map (sensitivities, masks).
  int mul_map(int a, Tensor map);
  /// Subtract a constant tensor (measured k-space).
  int sub_const(int a, Tensor k);
  /// Real tensor times complex tensor, channelwise.
  int rc_scale(int p, int w);
  int mag_sq(int a);  // complex -> real |.|^2
  /// Reinterpret complex 1ch as real 2ch (re, im) and back.
  int c2p(int a);
  int p2c(int a);

  // -- reductions ------------------------------------------------------
  /// Mean squared complex error against a constant target -> scalar.
  int mse_loss(int a, Tensor target);
  /// Mean absolute error (real) against a constant target -> scalar.
  int mae_loss(int a, Tensor target);
  int sum_all(int a);  // real tensor -> scalar

  const Tensor& val(int id) const { return nodes_[id].value; }
  /// Valid after backward(); zero tensor if the node was never reached.
  const Tensor& grad(int id);

  /// Seeds d(root)/d(root) = 1 and sweeps in reverse topological order.
  /// root must be a scalar node.
  void backward(int root);

  size_t size() const { return nodes_.size(); }

private:
  enum class Op : uint8_t {
    Leaf, Conv2d, Relu, Clamp01, Add, Sub, MulReal, DivReal, ScaleConst,
    SMul, SAdd, SDiv, Softplus, Shrink, Fft, Ifft, Swt, SwtAdj, MulMap,
    SubConst, RcScale, MagSq, C2P, P2C, MseLoss, MaeLoss, SumAll,
  };

  struct Node {
    Op op;
    int a = -1, b = -1, c3 = -1;
    Tensor value;
    Tensor grad;
    bool grad_live = false;
    Tensor aux;     // constant map / loss target / shrink keep-mask
    double k = 0.0; // ScaleConst factor or shrink threshold
  };

  std::vector<Node> nodes_;

  int push(Node&& n);
  Tensor& touch_grad(int id);
  void backprop_node(int id);
};

}  // namespace jeo
