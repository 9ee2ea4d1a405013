#include "jeo/image_solver.hpp"

namespace jeo {

namespace {

Tensor mask_tensor(const SamplingMask& mask) {
  Tensor t = Tensor::complex(1, mask.height, mask.width);
  for (size_t k = 0; k < mask.pattern.size(); ++k)
    t.c[k] = cplx(static_cast<double>(mask.pattern[k]), 0.0);
  return t;
}

Tensor conj_tensor(const ComplexImage& img) {
  Tensor t = tensor_from(img);
  for (cplx& v : t.c) v = std::conj(v);
  return t;
}

}  // namespace

int dc_gradient_node(Tape& tape, int x, const CoilSystem& cs) {
  const Tensor mask = mask_tensor(cs.mask);
  int acc = -1;
  for (int i = 0; i < cs.n; ++i) {
    int k = tape.mul_map(x, tensor_from(cs.sens[i]));
    k = tape.fft(k);
    k = tape.mul_map(k, mask);
    k = tape.sub_const(k, tensor_from(cs.kspace[i]));
    // residual already lives on the mask support, so U^H is a no-op here
    int g = tape.ifft(k);
    g = tape.mul_map(g, conj_tensor(cs.sens[i]));
    acc = (i == 0) ? g : tape.add(acc, g);
  }
  return acc;
}

int image_prox_node(Tape& tape, int x, const ProximalModule& idn, const std::vector<int>& params) {
  if (idn.channels != 2)
    throw std::invalid_argument("image_prox: IDN must be a 2-channel module");
  return tape.p2c(forward(idn, tape, tape.c2p(x), params));
}

int image_step_node(Tape& tape, int x, int z, int pne, const CoilSystem& cs, int rho, int beta,
                    int s, int wx) {
  int bracket = dc_gradient_node(tape, x, cs);
  if (pne >= 0) {
    if (wx < 0) wx = tape.swt(x);
    const int p2 = tape.mul(pne, pne);
    const int reg = tape.swt_adj(tape.rc_scale(p2, wx));
    bracket = tape.add(bracket, tape.smul(rho, reg));
  }
  // - beta (Z - x)
  bracket = tape.sub(bracket, tape.smul(beta, tape.sub(z, x)));
  return tape.sub(x, tape.smul(s, bracket));
}

ComplexImage image_prox(const ComplexImage& x, const ProximalModule& idn) {
  Tape tape;
  const int in = tape.leaf(tensor_from(x));
  return image_from(tape.val(image_prox_node(tape, in, idn, register_params(idn, tape))));
}

ComplexImage image_step(const ImageStepInputs& in) {
  if (in.rho < 0.0 || in.beta < 0.0) throw std::invalid_argument("image_step: rho, beta must be >= 0");
  if (in.s < 0.0) throw std::invalid_argument("image_step: s must be >= 0");
  Tape tape;
  const int x = tape.leaf(tensor_from(in.x));
  const int z = tape.leaf(tensor_from(in.z));
  const int p = tape.leaf(tensor_from(in.pne));
  const int out = image_step_node(tape, x, z, p, in.cs, tape.leaf(Tensor::scalar(in.rho)),
                                  tape.leaf(Tensor::scalar(in.beta)),
                                  tape.leaf(Tensor::scalar(in.s)));
  return image_from(tape.val(out));
}

ComplexImage image_step_noedge(const ComplexImage& x, const ComplexImage& z, const CoilSystem& cs,
                               double beta, double s) {
  Tape tape;
  const int xn = tape.leaf(tensor_from(x));
  const int zn = tape.leaf(tensor_from(z));
  const int out = image_step_node(tape, xn, zn, -1, cs, -1, tape.leaf(Tensor::scalar(beta)),
                                  tape.leaf(Tensor::scalar(s)));
  return image_from(tape.val(out));
}

}  // namespace jeo
