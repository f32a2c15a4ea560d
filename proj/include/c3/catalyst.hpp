#pragma once

#include <utility>

#include "c3/fft.hpp"
#include "c3/mask.hpp"
#include "c3/tensor.hpp"

namespace c3 {

/// Exact split of a spectrum into masked (low) and complementary (high) parts.
struct SpectrumPair {
    Spectrum low;
    Spectrum high;
};

/// One low-band amplification: scale the coefficients selected by mask(rho)
/// by lambda, keep the rest untouched.
struct AmplificationSpec {
    double lambda = 1.0;
    double rho = 0.25;
};

/// Uniform backbone scale b plus low-band skip scale s under mask(rho_skip).
struct FreeUSpec {
    double b = 1.0;
    double s = 1.0;
    double rho_skip = 0.25;
};

/// Throws DomainError unless lambda is finite and >= 0 and rho in [0, 1].
void validate_spec(const AmplificationSpec& spec);
void validate_spec(const FreeUSpec& spec);

SpectrumPair decompose(const Spectrum& f, const LowFreqMask& m);

/// IFFT(lambda * f_L + f_H): amplifies the low band of every channel while
/// preserving the high-frequency coefficients exactly.
FeatureMap amplify_low(const FeatureMap& x, const AmplificationSpec& spec);

/// Scalar multiply; agrees with amplify_low at rho = 1 within FFT round-trip
/// tolerance but skips the transform entirely.
FeatureMap amplify_uniform(const FeatureMap& x, double lambda);

/// Fraction of spectral energy outside the low band under mask(rho); 0 for
/// zero-energy inputs. Result in [0, 1].
double high_band_energy(const FeatureMap& x, double rho);

/// Backbone scaled uniformly by b; the skip's low band under mask(rho_skip)
/// scaled by s. Returns (backbone', skip').
std::pair<FeatureMap, FeatureMap> freeu_transform(const FeatureMap& backbone,
                                                  const FeatureMap& skip, const FreeUSpec& spec);

}  // namespace c3
