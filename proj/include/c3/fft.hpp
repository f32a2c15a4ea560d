#pragma once

#include "c3/tensor.hpp"

namespace c3 {

/// Per-channel 2D DFT, unnormalized forward convention (ifft2 divides by H*W).
/// Radix-2 only; throws DimensionError for non power-of-two spatial dims.
Spectrum fft2(const FeatureMap& x);

/// Inverse 2D DFT with 1/(H*W) normalization. Returns the real part; throws
/// SymmetryError when the discarded imaginary residual exceeds
/// 1e-4 * RMS(real part), which signals a non-Hermitian spectrum.
FeatureMap ifft2(const Spectrum& f);

/// Sum of |F|^2 over all channels and coefficients.
double spectral_energy(const Spectrum& f);

}  // namespace c3
