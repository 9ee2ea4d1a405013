#include "jeo/fft.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace jeo {

namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Per-length twiddle tables, stages concatenated: for len = 2,4,...,n the
// len/2 factors w_len^k. Cached per thread; tapes in worker threads reuse
// their own copies.
const std::vector<cplx>& twiddles(int n, bool inverse) {
  thread_local std::vector<std::vector<cplx>> cache[2];  // [inverse][log2 n]
  int lg = 0;
  while ((1 << lg) < n) ++lg;
  auto& slot = cache[inverse ? 1 : 0];
  if (static_cast<int>(slot.size()) <= lg) slot.resize(lg + 1);
  std::vector<cplx>& t = slot[lg];
  if (t.empty() && n >= 2) {
    const double sign = inverse ? 1.0 : -1.0;
    for (int len = 2; len <= n; len <<= 1)
      for (int k = 0; k < len / 2; ++k) {
        const double ang = sign * 2.0 * std::numbers::pi * k / len;
        t.emplace_back(std::cos(ang), std::sin(ang));
      }
  }
  return t;
}

// In-place contiguous radix-2 Cooley-Tukey, unnormalized.
void fft_pow2(cplx* x, int n, bool inverse) {
  for (int i = 1, j = 0; i < n; ++i) {
    int bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  const cplx* tw = twiddles(n, inverse).data();
  for (int len = 2; len <= n; len <<= 1) {
    const int half = len / 2;
    for (int i = 0; i < n; i += len) {
      cplx* lo = x + i;
      cplx* hi = x + i + half;
      for (int k = 0; k < half; ++k) {
        const cplx u = lo[k];
        const cplx v = hi[k] * tw[k];
        lo[k] = u + v;
        hi[k] = u - v;
      }
    }
    tw += half;
  }
}

// Direct O(n^2) DFT for non-power-of-two lengths. Desk-scale sizes only.
void dft_naive(cplx* x, int n, double sign) {
  std::vector<cplx> in(x, x + n);
  for (int k = 0; k < n; ++k) {
    cplx acc{0.0, 0.0};
    for (int m = 0; m < n; ++m) {
      const double ang = sign * 2.0 * std::numbers::pi * k * m / n;
      acc += in[m] * cplx(std::cos(ang), std::sin(ang));
    }
    x[k] = acc;
  }
}

void fft_1d(cplx* x, int n, bool inverse) {
  if (n == 1) return;
  if (is_pow2(n))
    fft_pow2(x, n, inverse);
  else
    dft_naive(x, n, inverse ? 1.0 : -1.0);
}

// Unnormalized 2-D transform, rows then columns; columns go through a
// contiguous scratch line.
void fft2_raw(cplx* d, int h, int w, bool inverse) {
  for (int i = 0; i < h; ++i) fft_1d(d + static_cast<size_t>(i) * w, w, inverse);
  thread_local std::vector<cplx> col;
  col.resize(h);
  for (int j = 0; j < w; ++j) {
    for (int i = 0; i < h; ++i) col[i] = d[static_cast<size_t>(i) * w + j];
    fft_1d(col.data(), h, inverse);
    for (int i = 0; i < h; ++i) d[static_cast<size_t>(i) * w + j] = col[i];
  }
}

// fftshift moves index 0 to floor(N/2); ifftshift is its inverse. The two
// differ for odd lengths.
size_t shifted_index(int i, int j, int h, int w, bool inverse) {
  const int sh = inverse ? (h - h / 2) : h / 2;
  const int sw = inverse ? (w - w / 2) : w / 2;
  return static_cast<size_t>((i + sh) % h) * w + (j + sw) % w;
}

// Centered transform of one plane, out must not alias in.
//
// For even dimensions both shifts collapse into (-1)^(i+j) modulations
// around the raw transform (with a global sign (-1)^(H/2+W/2)), which
// avoids any scratch traffic; odd sizes take the explicit-permutation path.
void fft2c_plane_impl(const cplx* in, cplx* out, int h, int w, bool inverse) {
  const size_t n = static_cast<size_t>(h) * w;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  if (h % 2 == 0 && w % 2 == 0) {
    for (int i = 0; i < h; ++i) {
      const cplx* src = in + static_cast<size_t>(i) * w;
      cplx* dst = out + static_cast<size_t>(i) * w;
      for (int j = 0; j < w; ++j) dst[j] = ((i + j) & 1) ? -src[j] : src[j];
    }
    fft2_raw(out, h, w, inverse);
    const double g = ((h / 2 + w / 2) & 1) ? -scale : scale;
    for (int i = 0; i < h; ++i) {
      cplx* dst = out + static_cast<size_t>(i) * w;
      for (int j = 0; j < w; ++j) dst[j] *= ((i + j) & 1) ? -g : g;
    }
  } else {
    thread_local std::vector<cplx> scratch;
    scratch.resize(n);
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j)
        out[shifted_index(i, j, h, w, true)] = in[static_cast<size_t>(i) * w + j];
    fft2_raw(out, h, w, inverse);
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j)
        scratch[shifted_index(i, j, h, w, false)] = scale * out[static_cast<size_t>(i) * w + j];
    std::copy(scratch.begin(), scratch.end(), out);
  }
}

}  // namespace

namespace fft_detail {

void fft2c_plane(const cplx* in, cplx* out, int h, int w, bool inverse) {
  fft2c_plane_impl(in, out, h, w, inverse);
}

}  // namespace fft_detail

ComplexImage fft2c(const ComplexImage& img) {
  ComplexImage out(img.height, img.width);
  fft2c_plane_impl(img.data.data(), out.data.data(), img.height, img.width, false);
  return out;
}

ComplexImage ifft2c(const ComplexImage& img) {
  ComplexImage out(img.height, img.width);
  fft2c_plane_impl(img.data.data(), out.data.data(), img.height, img.width, true);
  return out;
}

}  // namespace jeo
