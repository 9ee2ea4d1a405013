#include "jeo/tape.hpp"

#include <cmath>
#include <stdexcept>

#include "jeo/fft.hpp"
#include "jeo/wavelet.hpp"

namespace jeo {

namespace {

// One output row of a circular 3x3 convolution, all nine taps fused:
// acc[x] += sum_{ky,kx} k[ky*3+kx] * row_ky[x + kx - 1], rows wrapped.
void conv_row_acc(double* acc, const double* rm, const double* r0, const double* rp,
                  const double* k, int w) {
  acc[0] += k[0] * rm[w - 1] + k[1] * rm[0] + k[2] * rm[1] +
            k[3] * r0[w - 1] + k[4] * r0[0] + k[5] * r0[1] +
            k[6] * rp[w - 1] + k[7] * rp[0] + k[8] * rp[1];
  for (int x = 1; x < w - 1; ++x)
    acc[x] += k[0] * rm[x - 1] + k[1] * rm[x] + k[2] * rm[x + 1] +
              k[3] * r0[x - 1] + k[4] * r0[x] + k[5] * r0[x + 1] +
              k[6] * rp[x - 1] + k[7] * rp[x] + k[8] * rp[x + 1];
  acc[w - 1] += k[0] * rm[w - 2] + k[1] * rm[w - 1] + k[2] * rm[0] +
                k[3] * r0[w - 2] + k[4] * r0[w - 1] + k[5] * r0[0] +
                k[6] * rp[w - 2] + k[7] * rp[w - 1] + k[8] * rp[0];
}

// Nine weight-gradient accumulators for one row:
// a[ky*3+kx] += sum_x g[x] * row_ky[x + kx - 1]
void conv_row_wgrad(const double* g, const double* rm, const double* r0, const double* rp,
                    double* a, int w) {
  a[0] += g[0] * rm[w - 1];
  a[1] += g[0] * rm[0];
  a[2] += g[0] * rm[1];
  a[3] += g[0] * r0[w - 1];
  a[4] += g[0] * r0[0];
  a[5] += g[0] * r0[1];
  a[6] += g[0] * rp[w - 1];
  a[7] += g[0] * rp[0];
  a[8] += g[0] * rp[1];
  double a0 = 0, a1 = 0, a2 = 0, a3 = 0, a4 = 0, a5 = 0, a6 = 0, a7 = 0, a8 = 0;
  for (int x = 1; x < w - 1; ++x) {
    const double gx = g[x];
    a0 += gx * rm[x - 1];
    a1 += gx * rm[x];
    a2 += gx * rm[x + 1];
    a3 += gx * r0[x - 1];
    a4 += gx * r0[x];
    a5 += gx * r0[x + 1];
    a6 += gx * rp[x - 1];
    a7 += gx * rp[x];
    a8 += gx * rp[x + 1];
  }
  {
    const double gx = g[w - 1];
    a0 += gx * rm[w - 2];
    a1 += gx * rm[w - 1];
    a2 += gx * rm[0];
    a3 += gx * r0[w - 2];
    a4 += gx * r0[w - 1];
    a5 += gx * r0[0];
    a6 += gx * rp[w - 2];
    a7 += gx * rp[w - 1];
    a8 += gx * rp[0];
  }
  a[0] += a0;
  a[1] += a1;
  a[2] += a2;
  a[3] += a3;
  a[4] += a4;
  a[5] += a5;
  a[6] += a6;
  a[7] += a7;
  a[8] += a8;
}

double stable_softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

int Tape::push(Node&& n) {
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

Tensor& Tape::touch_grad(int id) {
  Node& n = nodes_[id];
  if (!n.grad_live) {
    n.grad = n.value.zeros_like();
    n.grad_live = true;
  }
  return n.grad;
}

const Tensor& Tape::grad(int id) {
  touch_grad(id);
  return nodes_[id].grad;
}

int Tape::leaf(Tensor v) {
  Node n;
  n.op = Op::Leaf;
  n.value = std::move(v);
  return push(std::move(n));
}

int Tape::conv2d(int x, int weight, int bias) {
  const Tensor& in = nodes_[x].value;
  const Tensor& wgt = nodes_[weight].value;
  const Tensor& b = nodes_[bias].value;
  if (in.is_complex() || wgt.is_complex() || b.is_complex())
    throw std::invalid_argument("conv2d: real tensors required");
  if (wgt.height != 3 || wgt.width != 3) throw std::invalid_argument("conv2d: 3x3 kernels only");
  if (in.height < 2 || in.width < 2) throw std::invalid_argument("conv2d: image too small");
  const int out_ch = b.channels;
  const int in_ch = in.channels;
  if (wgt.channels != out_ch * in_ch) throw std::invalid_argument("conv2d: channel mismatch");

  Node n;
  n.op = Op::Conv2d;
  n.a = x;
  n.b = weight;
  n.c3 = bias;
  n.value = Tensor::real_uninit(out_ch, in.height, in.width);
  const int h = in.height, w = in.width;
  for (int o = 0; o < out_ch; ++o) {
    double* outp = n.value.plane_r(o);
    const double bo = b.r[o];
    for (int y = 0; y < h; ++y) {
      double* acc = outp + static_cast<size_t>(y) * w;
      for (int xx = 0; xx < w; ++xx) acc[xx] = bo;
      for (int c = 0; c < in_ch; ++c) {
        const double* inp = in.plane_r(c);
        conv_row_acc(acc, inp + static_cast<size_t>((y + h - 1) % h) * w,
                     inp + static_cast<size_t>(y) * w,
                     inp + static_cast<size_t>((y + 1) % h) * w, wgt.plane_r(o * in_ch + c), w);
      }
    }
  }
  return push(std::move(n));
}

int Tape::relu(int x) {
  Node n;
  n.op = Op::Relu;
  n.a = x;
  n.value = nodes_[x].value;
  for (double& v : n.value.r) v = v > 0.0 ? v : 0.0;
  return push(std::move(n));
}

int Tape::clamp01(int x) {
  Node n;
  n.op = Op::Clamp01;
  n.a = x;
  n.value = nodes_[x].value;
  for (double& v : n.value.r) v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
  return push(std::move(n));
}

int Tape::add(int a, int b) {
  const Tensor& ta = nodes_[a].value;
  const Tensor& tb = nodes_[b].value;
  if (!ta.same_shape(tb)) throw std::invalid_argument("add: shape mismatch");
  Node n;
  n.op = Op::Add;
  n.a = a;
  n.b = b;
  n.value = ta;
  for (size_t k = 0; k < n.value.r.size(); ++k) n.value.r[k] += tb.r[k];
  for (size_t k = 0; k < n.value.c.size(); ++k) n.value.c[k] += tb.c[k];
  return push(std::move(n));
}

int Tape::sub(int a, int b) {
  const Tensor& ta = nodes_[a].value;
  const Tensor& tb = nodes_[b].value;
  if (!ta.same_shape(tb)) throw std::invalid_argument("sub: shape mismatch");
  Node n;
  n.op = Op::Sub;
  n.a = a;
  n.b = b;
  n.value = ta;
  for (size_t k = 0; k < n.value.r.size(); ++k) n.value.r[k] -= tb.r[k];
  for (size_t k = 0; k < n.value.c.size(); ++k) n.value.c[k] -= tb.c[k];
  return push(std::move(n));
}

int Tape::mul(int a, int b) {
  const Tensor& ta = nodes_[a].value;
  const Tensor& tb = nodes_[b].value;
  if (!ta.same_shape(tb) || ta.is_complex())
    throw std::invalid_argument("mul: real same-shape tensors required");
  Node n;
  n.op = Op::MulReal;
  n.a = a;
  n.b = b;
  n.value = ta;
  for (size_t k = 0; k < n.value.r.size(); ++k) n.value.r[k] *= tb.r[k];
  return push(std::move(n));
}

int Tape::div(int a, int b) {
  const Tensor& ta = nodes_[a].value;
  const Tensor& tb = nodes_[b].value;
  if (!ta.same_shape(tb) || ta.is_complex())
    throw std::invalid_argument("div: real same-shape tensors required");
  Node n;
  n.op = Op::DivReal;
  n.a = a;
  n.b = b;
  n.value = ta;
  for (size_t k = 0; k < n.value.r.size(); ++k) n.value.r[k] /= tb.r[k];
  return push(std::move(n));
}

int Tape::scale(int a, double k) {
  Node n;
  n.op = Op::ScaleConst;
  n.a = a;
  n.k = k;
  n.value = nodes_[a].value;
  for (double& v : n.value.r) v *= k;
  for (cplx& v : n.value.c) v *= k;
  return push(std::move(n));
}

int Tape::smul(int s, int t) {
  const Tensor& ts = nodes_[s].value;
  if (ts.is_complex() || ts.count() != 1) throw std::invalid_argument("smul: scalar node required");
  Node n;
  n.op = Op::SMul;
  n.a = s;
  n.b = t;
  n.value = nodes_[t].value;
  const double sv = ts.r[0];
  for (double& v : n.value.r) v *= sv;
  for (cplx& v : n.value.c) v *= sv;
  return push(std::move(n));
}

int Tape::sadd(int s, int t) {
  const Tensor& ts = nodes_[s].value;
  const Tensor& tt = nodes_[t].value;
  if (ts.is_complex() || ts.count() != 1 || tt.is_complex())
    throw std::invalid_argument("sadd: scalar + real tensor required");
  Node n;
  n.op = Op::SAdd;
  n.a = s;
  n.b = t;
  n.value = tt;
  const double sv = ts.r[0];
  for (double& v : n.value.r) v += sv;
  return push(std::move(n));
}

int Tape::sdiv(int s, int t) {
  const Tensor& ts = nodes_[s].value;
  const Tensor& tt = nodes_[t].value;
  if (ts.is_complex() || ts.count() != 1 || tt.is_complex())
    throw std::invalid_argument("sdiv: scalar / real tensor required");
  Node n;
  n.op = Op::SDiv;
  n.a = s;
  n.b = t;
  n.value = tt;
  const double sv = ts.r[0];
  for (double& v : n.value.r) v = sv / v;
  return push(std::move(n));
}

int Tape::softplus(int x) {
  if (nodes_[x].value.is_complex()) throw std::invalid_argument("softplus: real tensor required");
  Node n;
  n.op = Op::Softplus;
  n.a = x;
  n.value = nodes_[x].value;
  for (double& v : n.value.r) v = stable_softplus(v);
  return push(std::move(n));
}

int Tape::shrink_detail(int x, double threshold) {
  const Tensor& in = nodes_[x].value;
  if (in.is_complex()) throw std::invalid_argument("shrink_detail: real tensor required");
  if (in.height < 2 || in.width < 2) throw std::invalid_argument("shrink_detail: image too small");
  Node n;
  n.op = Op::Shrink;
  n.a = x;
  n.k = threshold;
  n.value = in;
  n.aux = Tensor::real(3 * in.channels, in.height, in.width);  // keep-mask per coefficient
  const int h = in.height, w = in.width;
  const size_t np = in.plane();
  std::vector<double> d(3 * np), scratch(np), s2(np);
  for (int ch = 0; ch < in.channels; ++ch) {
    const double* src = in.plane_r(ch);
    wavelet_detail::detail_analysis(src, d.data(), d.data() + np, d.data() + 2 * np,
                                    scratch.data(), h, w);
    double* mask = n.aux.plane_r(3 * ch);
    // shrink(v) - v  per detail coefficient, then one adjoint pass
    for (size_t k = 0; k < 3 * np; ++k) {
      const double keep = std::abs(d[k]) > threshold ? 1.0 : 0.0;
      mask[k] = keep;
      d[k] = keep ? -threshold * (d[k] > 0.0 ? 1.0 : -1.0) : -d[k];
    }
    wavelet_detail::detail_adjoint(d.data(), d.data() + np, d.data() + 2 * np,
                                   n.value.plane_r(ch), scratch.data(), s2.data(), h, w);
  }
  return push(std::move(n));
}

int Tape::fft(int a) {
  const Tensor& in = nodes_[a].value;
  if (!in.is_complex()) throw std::invalid_argument("fft: complex tensor required");
  Node n;
  n.op = Op::Fft;
  n.a = a;
  n.value = Tensor::complex(in.channels, in.height, in.width);
  for (int ch = 0; ch < in.channels; ++ch)
    fft_detail::fft2c_plane(in.plane_c(ch), n.value.plane_c(ch), in.height, in.width, false);
  return push(std::move(n));
}

int Tape::ifft(int a) {
  const Tensor& in = nodes_[a].value;
  if (!in.is_complex()) throw std::invalid_argument("ifft: complex tensor required");
  Node n;
  n.op = Op::Ifft;
  n.a = a;
  n.value = Tensor::complex(in.channels, in.height, in.width);
  for (int ch = 0; ch < in.channels; ++ch)
    fft_detail::fft2c_plane(in.plane_c(ch), n.value.plane_c(ch), in.height, in.width, true);
  return push(std::move(n));
}

int Tape::swt(int a) {
  const Tensor& in = nodes_[a].value;
  if (!in.is_complex() || in.channels != 1)
    throw std::invalid_argument("swt: complex 1-channel tensor required");
  Node n;
  n.op = Op::Swt;
  n.a = a;
  n.value = Tensor::complex(3, in.height, in.width);
  std::vector<cplx> scratch(in.plane());
  wavelet_detail::detail_analysis(in.plane_c(0), n.value.plane_c(0), n.value.plane_c(1),
                                  n.value.plane_c(2), scratch.data(), in.height, in.width);
  return push(std::move(n));
}

int Tape::swt_adj(int a) {
  const Tensor& in = nodes_[a].value;
  if (!in.is_complex() || in.channels != 3)
    throw std::invalid_argument("swt_adj: complex 3-channel tensor required");
  Node n;
  n.op = Op::SwtAdj;
  n.a = a;
  n.value = Tensor::complex(1, in.height, in.width);
  std::vector<cplx> s1(in.plane()), s2(in.plane());
  wavelet_detail::detail_adjoint(in.plane_c(0), in.plane_c(1), in.plane_c(2), n.value.plane_c(0),
                                 s1.data(), s2.data(), in.height, in.width);
  return push(std::move(n));
}

int Tape::mul_map(int a, Tensor map) {
  const Tensor& in = nodes_[a].value;
  if (!in.is_complex() || !map.is_complex() || !in.same_shape(map))
    throw std::invalid_argument("mul_map: complex same-shape tensors required");
  Node n;
  n.op = Op::MulMap;
  n.a = a;
  n.value = in;
  for (size_t k = 0; k < n.value.c.size(); ++k) n.value.c[k] *= map.c[k];
  n.aux = std::move(map);
  return push(std::move(n));
}

int Tape::sub_const(int a, Tensor k) {
  const Tensor& in = nodes_[a].value;
  if (!in.same_shape(k)) throw std::invalid_argument("sub_const: shape mismatch");
  Node n;
  n.op = Op::SubConst;
  n.a = a;
  n.value = in;
  for (size_t p = 0; p < n.value.c.size(); ++p) n.value.c[p] -= k.c[p];
  for (size_t p = 0; p < n.value.r.size(); ++p) n.value.r[p] -= k.r[p];
  n.aux = std::move(k);
  return push(std::move(n));
}

int Tape::rc_scale(int p, int w) {
  const Tensor& tp = nodes_[p].value;
  const Tensor& tw = nodes_[w].value;
  if (tp.is_complex() || !tw.is_complex() || tp.channels != tw.channels ||
      tp.height != tw.height || tp.width != tw.width)
    throw std::invalid_argument("rc_scale: real/complex channel-aligned tensors required");
  Node n;
  n.op = Op::RcScale;
  n.a = p;
  n.b = w;
  n.value = tw;
  for (size_t k = 0; k < n.value.c.size(); ++k) n.value.c[k] *= tp.r[k];
  return push(std::move(n));
}

int Tape::mag_sq(int a) {
  const Tensor& in = nodes_[a].value;
  if (!in.is_complex()) throw std::invalid_argument("mag_sq: complex tensor required");
  Node n;
  n.op = Op::MagSq;
  n.a = a;
  n.value = Tensor::real_uninit(in.channels, in.height, in.width);
  for (size_t k = 0; k < in.c.size(); ++k) n.value.r[k] = std::norm(in.c[k]);
  return push(std::move(n));
}

int Tape::c2p(int a) {
  const Tensor& in = nodes_[a].value;
  if (!in.is_complex() || in.channels != 1)
    throw std::invalid_argument("c2p: complex 1-channel tensor required");
  Node n;
  n.op = Op::C2P;
  n.a = a;
  n.value = Tensor::real_uninit(2, in.height, in.width);
  for (size_t k = 0; k < in.plane(); ++k) {
    n.value.r[k] = in.c[k].real();
    n.value.r[in.plane() + k] = in.c[k].imag();
  }
  return push(std::move(n));
}

int Tape::p2c(int a) {
  const Tensor& in = nodes_[a].value;
  if (in.is_complex() || in.channels != 2)
    throw std::invalid_argument("p2c: real 2-channel tensor required");
  Node n;
  n.op = Op::P2C;
  n.a = a;
  n.value = Tensor::complex(1, in.height, in.width);
  for (size_t k = 0; k < n.value.plane(); ++k)
    n.value.c[k] = cplx(in.r[k], in.r[in.plane() + k]);
  return push(std::move(n));
}

int Tape::mse_loss(int a, Tensor target) {
  const Tensor& in = nodes_[a].value;
  if (!in.is_complex() || !in.same_shape(target))
    throw std::invalid_argument("mse_loss: complex tensor and matching target required");
  double acc = 0.0;
  for (size_t k = 0; k < in.c.size(); ++k) acc += std::norm(in.c[k] - target.c[k]);
  Node n;
  n.op = Op::MseLoss;
  n.a = a;
  n.value = Tensor::scalar(acc / static_cast<double>(in.count()));
  n.aux = std::move(target);
  return push(std::move(n));
}

int Tape::mae_loss(int a, Tensor target) {
  const Tensor& in = nodes_[a].value;
  if (in.is_complex() || !in.same_shape(target))
    throw std::invalid_argument("mae_loss: real tensor and matching target required");
  double acc = 0.0;
  for (size_t k = 0; k < in.r.size(); ++k) acc += std::abs(in.r[k] - target.r[k]);
  Node n;
  n.op = Op::MaeLoss;
  n.a = a;
  n.value = Tensor::scalar(acc / static_cast<double>(in.count()));
  n.aux = std::move(target);
  return push(std::move(n));
}

int Tape::sum_all(int a) {
  const Tensor& in = nodes_[a].value;
  if (in.is_complex()) throw std::invalid_argument("sum_all: real tensor required");
  double acc = 0.0;
  for (double v : in.r) acc += v;
  Node n;
  n.op = Op::SumAll;
  n.a = a;
  n.value = Tensor::scalar(acc);
  return push(std::move(n));
}

void Tape::backward(int root) {
  if (root < 0 || root >= static_cast<int>(nodes_.size()))
    throw std::invalid_argument("backward: bad root id");
  if (nodes_[root].value.count() != 1 || nodes_[root].value.is_complex())
    throw std::invalid_argument("backward: root must be a real scalar");
  touch_grad(root).r[0] = 1.0;
  for (int id = root; id >= 0; --id)
    if (nodes_[id].grad_live && nodes_[id].op != Op::Leaf) backprop_node(id);
}

void Tape::backprop_node(int id) {
  Node& n = nodes_[id];
  const Tensor& g = n.grad;
  switch (n.op) {
    case Op::Leaf:
      break;

    case Op::Conv2d: {
      const Tensor& in = nodes_[n.a].value;
      const Tensor& wgt = nodes_[n.b].value;
      const int out_ch = nodes_[n.c3].value.channels;
      const int in_ch = in.channels;
      Tensor& gin = touch_grad(n.a);
      Tensor& gw = touch_grad(n.b);
      Tensor& gb = touch_grad(n.c3);
      const int h = in.height, w = in.width;
      for (int o = 0; o < out_ch; ++o) {
        const double* gout = g.plane_r(o);
        double bacc = 0.0;
        for (size_t p = 0; p < g.plane(); ++p) bacc += gout[p];
        gb.r[o] += bacc;
        for (int c = 0; c < in_ch; ++c) {
          const double* inp = in.plane_r(c);
          double* gk = gw.plane_r(o * in_ch + c);
          for (int y = 0; y < h; ++y)
            conv_row_wgrad(gout + static_cast<size_t>(y) * w,
                           inp + static_cast<size_t>((y + h - 1) % h) * w,
                           inp + static_cast<size_t>(y) * w,
                           inp + static_cast<size_t>((y + 1) % h) * w, gk, w);
        }
      }
      // input gradient: correlation with the flipped kernels
      for (int c = 0; c < in_ch; ++c) {
        double* ginp = gin.plane_r(c);
        for (int y = 0; y < h; ++y) {
          double* acc = ginp + static_cast<size_t>(y) * w;
          for (int o = 0; o < out_ch; ++o) {
            const double* k = wgt.plane_r(o * in_ch + c);
            const double kf[9] = {k[8], k[7], k[6], k[5], k[4], k[3], k[2], k[1], k[0]};
            const double* gout = g.plane_r(o);
            conv_row_acc(acc, gout + static_cast<size_t>((y + h - 1) % h) * w,
                         gout + static_cast<size_t>(y) * w,
                         gout + static_cast<size_t>((y + 1) % h) * w, kf, w);
          }
        }
      }
      break;
    }

    case Op::Relu: {
      const Tensor& x = nodes_[n.a].value;
      Tensor& gin = touch_grad(n.a);
      for (size_t k = 0; k < x.r.size(); ++k)
        if (x.r[k] > 0.0) gin.r[k] += g.r[k];
      break;
    }

    case Op::Clamp01: {
      const Tensor& x = nodes_[n.a].value;
      Tensor& gin = touch_grad(n.a);
      for (size_t k = 0; k < x.r.size(); ++k)
        if (x.r[k] >= 0.0 && x.r[k] <= 1.0) gin.r[k] += g.r[k];
      break;
    }

    case Op::Add: {
      Tensor& ga = touch_grad(n.a);
      Tensor& gb = touch_grad(n.b);
      for (size_t k = 0; k < g.r.size(); ++k) {
        ga.r[k] += g.r[k];
        gb.r[k] += g.r[k];
      }
      for (size_t k = 0; k < g.c.size(); ++k) {
        ga.c[k] += g.c[k];
        gb.c[k] += g.c[k];
      }
      break;
    }

    case Op::Sub: {
      Tensor& ga = touch_grad(n.a);
      Tensor& gb = touch_grad(n.b);
      for (size_t k = 0; k < g.r.size(); ++k) {
        ga.r[k] += g.r[k];
        gb.r[k] -= g.r[k];
      }
      for (size_t k = 0; k < g.c.size(); ++k) {
        ga.c[k] += g.c[k];
        gb.c[k] -= g.c[k];
      }
      break;
    }

    case Op::MulReal: {
      const Tensor& a = nodes_[n.a].value;
      const Tensor& b = nodes_[n.b].value;
      Tensor& ga = touch_grad(n.a);
      Tensor& gb = touch_grad(n.b);
      for (size_t k = 0; k < g.r.size(); ++k) {
        ga.r[k] += g.r[k] * b.r[k];
        gb.r[k] += g.r[k] * a.r[k];
      }
      break;
    }

    case Op::DivReal: {
      const Tensor& b = nodes_[n.b].value;
      Tensor& ga = touch_grad(n.a);
      Tensor& gb = touch_grad(n.b);
      for (size_t k = 0; k < g.r.size(); ++k) {
        ga.r[k] += g.r[k] / b.r[k];
        gb.r[k] -= g.r[k] * n.value.r[k] / b.r[k];
      }
      break;
    }

    case Op::ScaleConst: {
      Tensor& ga = touch_grad(n.a);
      for (size_t k = 0; k < g.r.size(); ++k) ga.r[k] += n.k * g.r[k];
      for (size_t k = 0; k < g.c.size(); ++k) ga.c[k] += n.k * g.c[k];
      break;
    }

    case Op::SMul: {
      const double sv = nodes_[n.a].value.r[0];
      const Tensor& t = nodes_[n.b].value;
      Tensor& gs = touch_grad(n.a);
      Tensor& gt = touch_grad(n.b);
      if (t.is_complex()) {
        double acc = 0.0;
        for (size_t k = 0; k < g.c.size(); ++k) {
          acc += g.c[k].real() * t.c[k].real() + g.c[k].imag() * t.c[k].imag();
          gt.c[k] += sv * g.c[k];
        }
        gs.r[0] += acc;
      } else {
        double acc = 0.0;
        for (size_t k = 0; k < g.r.size(); ++k) {
          acc += g.r[k] * t.r[k];
          gt.r[k] += sv * g.r[k];
        }
        gs.r[0] += acc;
      }
      break;
    }

    case Op::SAdd: {
      Tensor& gs = touch_grad(n.a);
      Tensor& gt = touch_grad(n.b);
      double acc = 0.0;
      for (size_t k = 0; k < g.r.size(); ++k) {
        acc += g.r[k];
        gt.r[k] += g.r[k];
      }
      gs.r[0] += acc;
      break;
    }

    case Op::SDiv: {
      const Tensor& t = nodes_[n.b].value;
      Tensor& gs = touch_grad(n.a);
      Tensor& gt = touch_grad(n.b);
      double acc = 0.0;
      for (size_t k = 0; k < g.r.size(); ++k) {
        acc += g.r[k] / t.r[k];
        gt.r[k] -= g.r[k] * n.value.r[k] / t.r[k];
      }
      gs.r[0] += acc;
      break;
    }

    case Op::Softplus: {
      const Tensor& x = nodes_[n.a].value;
      Tensor& ga = touch_grad(n.a);
      for (size_t k = 0; k < g.r.size(); ++k) ga.r[k] += g.r[k] * stable_sigmoid(x.r[k]);
      break;
    }

    case Op::Shrink: {
      // Jacobian is I + W^H (D - I) W with D = diag(keep-mask); self-adjoint.
      const Tensor& in = nodes_[n.a].value;
      Tensor& gin = touch_grad(n.a);
      const int h = in.height, w = in.width;
      const size_t np = in.plane();
      std::vector<double> d(3 * np), scratch(np), s2(np);
      for (int ch = 0; ch < in.channels; ++ch) {
        const double* gch = g.plane_r(ch);
        wavelet_detail::detail_analysis(gch, d.data(), d.data() + np, d.data() + 2 * np,
                                        scratch.data(), h, w);
        const double* mask = n.aux.plane_r(3 * ch);
        for (size_t k = 0; k < 3 * np; ++k) d[k] *= mask[k] - 1.0;
        double* out = gin.plane_r(ch);
        for (size_t k = 0; k < np; ++k) out[k] += gch[k];
        wavelet_detail::detail_adjoint(d.data(), d.data() + np, d.data() + 2 * np, out,
                                       scratch.data(), s2.data(), h, w);
      }
      break;
    }

    case Op::Fft:
    case Op::Ifft: {
      Tensor& ga = touch_grad(n.a);
      thread_local std::vector<cplx> buf;
      buf.resize(g.plane());
      for (int ch = 0; ch < g.channels; ++ch) {
        fft_detail::fft2c_plane(g.plane_c(ch), buf.data(), g.height, g.width, n.op == Op::Fft);
        cplx* dst = ga.plane_c(ch);
        for (size_t k = 0; k < buf.size(); ++k) dst[k] += buf[k];
      }
      break;
    }

    case Op::Swt: {
      Tensor& ga = touch_grad(n.a);
      std::vector<cplx> s1(g.plane()), s2(g.plane());
      wavelet_detail::detail_adjoint(g.plane_c(0), g.plane_c(1), g.plane_c(2), ga.plane_c(0),
                                     s1.data(), s2.data(), g.height, g.width);
      break;
    }

    case Op::SwtAdj: {
      Tensor& ga = touch_grad(n.a);
      Tensor tmp = Tensor::complex(3, g.height, g.width);
      std::vector<cplx> scratch(g.plane());
      wavelet_detail::detail_analysis(g.plane_c(0), tmp.plane_c(0), tmp.plane_c(1), tmp.plane_c(2),
                                      scratch.data(), g.height, g.width);
      for (size_t k = 0; k < ga.c.size(); ++k) ga.c[k] += tmp.c[k];
      break;
    }

    case Op::MulMap: {
      Tensor& ga = touch_grad(n.a);
      for (size_t k = 0; k < g.c.size(); ++k) ga.c[k] += std::conj(n.aux.c[k]) * g.c[k];
      break;
    }

    case Op::SubConst: {
      Tensor& ga = touch_grad(n.a);
      for (size_t k = 0; k < g.r.size(); ++k) ga.r[k] += g.r[k];
      for (size_t k = 0; k < g.c.size(); ++k) ga.c[k] += g.c[k];
      break;
    }

    case Op::RcScale: {
      const Tensor& p = nodes_[n.a].value;
      const Tensor& wv = nodes_[n.b].value;
      Tensor& gp = touch_grad(n.a);
      Tensor& gw = touch_grad(n.b);
      for (size_t k = 0; k < g.c.size(); ++k) {
        gp.r[k] += wv.c[k].real() * g.c[k].real() + wv.c[k].imag() * g.c[k].imag();
        gw.c[k] += p.r[k] * g.c[k];
      }
      break;
    }

    case Op::MagSq: {
      const Tensor& a = nodes_[n.a].value;
      Tensor& ga = touch_grad(n.a);
      for (size_t k = 0; k < g.r.size(); ++k) ga.c[k] += 2.0 * g.r[k] * a.c[k];
      break;
    }

    case Op::C2P: {
      Tensor& ga = touch_grad(n.a);
      const size_t np = ga.plane();
      for (size_t k = 0; k < np; ++k) ga.c[k] += cplx(g.r[k], g.r[np + k]);
      break;
    }

    case Op::P2C: {
      Tensor& ga = touch_grad(n.a);
      const size_t np = g.plane();
      for (size_t k = 0; k < np; ++k) {
        ga.r[k] += g.c[k].real();
        ga.r[np + k] += g.c[k].imag();
      }
      break;
    }

    case Op::MseLoss: {
      const Tensor& a = nodes_[n.a].value;
      Tensor& ga = touch_grad(n.a);
      const double gs = g.r[0] * 2.0 / static_cast<double>(a.count());
      for (size_t k = 0; k < a.c.size(); ++k) ga.c[k] += gs * (a.c[k] - n.aux.c[k]);
      break;
    }

    case Op::MaeLoss: {
      const Tensor& a = nodes_[n.a].value;
      Tensor& ga = touch_grad(n.a);
      const double gs = g.r[0] / static_cast<double>(a.count());
      for (size_t k = 0; k < a.r.size(); ++k) {
        const double d = a.r[k] - n.aux.r[k];
        ga.r[k] += gs * (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0));
      }
      break;
    }

    case Op::SumAll: {
      Tensor& ga = touch_grad(n.a);
      for (double& v : ga.r) v += g.r[0];
      break;
    }
  }
}

}  // namespace jeo
