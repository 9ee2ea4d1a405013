#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "jeo/image.hpp"

namespace jeo {

enum class MaskScheme : uint8_t {
  CartesianRandomLines = 0,
  CartesianEquidistantLines = 1,
  RandomPointwise = 2,
};

const char* mask_scheme_name(MaskScheme s);
MaskScheme mask_scheme_from_name(const std::string& name);

/// Binary k-space sampling pattern. Cartesian schemes sample whole columns
/// (phase-encode along the width axis); the center acs_lines columns are
/// always fully sampled when acs_lines > 0.
struct SamplingMask {
  int height = 0;
  int width = 0;
  std::vector<uint8_t> pattern;  // 1 = sampled, row-major
  MaskScheme scheme = MaskScheme::RandomPointwise;
  double acceleration = 1.0;
  int acs_lines = 0;

  uint8_t at(int i, int j) const { return pattern[static_cast<size_t>(i) * width + j]; }
  size_t sampled_count() const;
};

/// Per-coil sensitivities, the sampling mask, and the measured k-space
/// data y_i (zero off-mask). Immutable after construction.
struct CoilSystem {
  int n = 0;
  std::vector<ComplexImage> sens;
  SamplingMask mask;
  std::vector<ComplexImage> kspace;

  int height() const { return mask.height; }
  int width() const { return mask.width; }

  /// Throws std::invalid_argument on shape mismatch, unnormalized maps
  /// (sum_i |S_i|^2 must be 1 within 1e-10), or k-space energy off-mask.
  void validate() const;
};

SamplingMask make_mask(MaskScheme scheme, int height, int width, double acceleration,
                       int acs_lines, uint64_t seed);

/// Smooth complex coil profiles, pixelwise normalized so sum_i |S_i|^2 = 1.
/// n = 1 degenerates to S == 1.
std::vector<ComplexImage> make_sensitivities(int height, int width, int n, uint64_t seed);

/// mask .* fft2c(S_i .* x)
ComplexImage sense_forward(const ComplexImage& x, const CoilSystem& cs, int coil);

/// conj(S_i) .* ifft2c(mask .* k)
ComplexImage sense_adjoint(const ComplexImage& k, const CoilSystem& cs, int coil);

/// Gradient of (1/2) sum_i ||U F S_i x - y_i||^2.
ComplexImage dc_gradient(const ComplexImage& x, const CoilSystem& cs);

/// sum_i conj(S_i) .* ifft2c(y_i) -- the zero-filled baseline and the
/// pipeline's x^(0).
ComplexImage zero_filled_init(const CoilSystem& cs);

/// y_i = mask .* (fft2c(S_i .* gt) + N(0, noise_std) per component).
CoilSystem synthesize_acquisition(const ComplexImage& gt, int n, const SamplingMask& mask,
                                  double noise_std, uint64_t seed);

/// Piecewise-constant random ellipse phantom with magnitude in [0,1] and a
/// smooth linear phase ramp.
ComplexImage make_phantom(int height, int width, uint64_t seed);

struct Sample {
  ComplexImage gt;
  CoilSystem cs;
};

struct Dataset {
  std::vector<Sample> samples;

  int height() const { return samples.empty() ? 0 : samples[0].gt.height; }
  int width() const { return samples.empty() ? 0 : samples[0].gt.width; }
  int coils() const { return samples.empty() ? 0 : samples[0].cs.n; }
};

/// JEOMRI01 container, little-endian, complex values stored as float32
/// (re, im) pairs.
void save_dataset(const std::string& path, const Dataset& ds);

/// Loads a JEOMRI01 container. Sensitivity maps are re-normalized after the
/// float32 round-trip so the CoilSystem invariant holds exactly.
Dataset load_dataset(const std::string& path);

}  // namespace jeo
