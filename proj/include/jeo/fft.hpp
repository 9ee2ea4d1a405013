#pragma once

#include "jeo/image.hpp"

namespace jeo {

/// Centered orthonormal 2-D DFT: zero frequency at (H/2, W/2), scaling
/// 1/sqrt(H*W) so the transform is unitary and fft2c^H == ifft2c exactly.
ComplexImage fft2c(const ComplexImage& img);

/// Inverse (and adjoint) of fft2c.
ComplexImage ifft2c(const ComplexImage& img);

namespace fft_detail {
/// Plane-level centered transform; out must not alias in.
void fft2c_plane(const cplx* in, cplx* out, int h, int w, bool inverse);
}  // namespace fft_detail

}  // namespace jeo
