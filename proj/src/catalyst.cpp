#include "c3/catalyst.hpp"

#include <cmath>
#include <string>

namespace c3 {

namespace {

void check_finite_nonneg(double v, const char* name) {
    if (!std::isfinite(v) || v < 0.0) {
        throw DomainError(std::string(name) + " must be finite and >= 0, got " +
                          std::to_string(v));
    }
}

void check_rho(double rho, const char* name) {
    if (!(rho >= 0.0 && rho <= 1.0)) {
        throw DomainError(std::string(name) + " must lie in [0, 1], got " + std::to_string(rho));
    }
}

// Scale masked coefficients of f in place by `factor`.
void scale_low_band(Spectrum& f, const LowFreqMask& m, double factor) {
    const std::size_t plane = static_cast<std::size_t>(f.height) * f.width;
    for (int c = 0; c < f.channels; ++c) {
        std::complex<float>* z = f.data.data() + c * plane;
        for (std::size_t i = 0; i < plane; ++i) {
            if (m.bits[i]) {
                z[i] = {static_cast<float>(z[i].real() * factor),
                        static_cast<float>(z[i].imag() * factor)};
            }
        }
    }
}

}  // namespace

void validate_spec(const AmplificationSpec& spec) {
    check_finite_nonneg(spec.lambda, "amplification factor");
    check_rho(spec.rho, "cutoff ratio");
}

void validate_spec(const FreeUSpec& spec) {
    if (!std::isfinite(spec.b) || spec.b <= 0.0) {
        throw DomainError("backbone scale must be finite and > 0, got " + std::to_string(spec.b));
    }
    if (!std::isfinite(spec.s) || spec.s <= 0.0) {
        throw DomainError("skip scale must be finite and > 0, got " + std::to_string(spec.s));
    }
    check_rho(spec.rho_skip, "skip cutoff ratio");
}

SpectrumPair decompose(const Spectrum& f, const LowFreqMask& m) {
    if (f.height != m.height || f.width != m.width) {
        throw DimensionError("decompose: spectrum is " + std::to_string(f.height) + "x" +
                             std::to_string(f.width) + " but mask is " +
                             std::to_string(m.height) + "x" + std::to_string(m.width));
    }
    SpectrumPair pair{Spectrum(f.channels, f.height, f.width),
                      Spectrum(f.channels, f.height, f.width)};
    const std::size_t plane = static_cast<std::size_t>(f.height) * f.width;
    for (int c = 0; c < f.channels; ++c) {
        const std::complex<float>* src = f.data.data() + c * plane;
        std::complex<float>* lo = pair.low.data.data() + c * plane;
        std::complex<float>* hi = pair.high.data.data() + c * plane;
        for (std::size_t i = 0; i < plane; ++i) {
            (m.bits[i] ? lo[i] : hi[i]) = src[i];
        }
    }
    return pair;
}

FeatureMap amplify_low(const FeatureMap& x, const AmplificationSpec& spec) {
    validate_spec(spec);
    Spectrum f = fft2(x);
    scale_low_band(f, cached_low_mask(x.height, x.width, spec.rho), spec.lambda);
    return ifft2(f);
}

FeatureMap amplify_uniform(const FeatureMap& x, double lambda) {
    check_finite_nonneg(lambda, "amplification factor");
    FeatureMap out = x;
    for (float& v : out.data) v = static_cast<float>(v * lambda);
    return out;
}

double high_band_energy(const FeatureMap& x, double rho) {
    check_rho(rho, "cutoff ratio");
    const Spectrum f = fft2(x);
    const double total = spectral_energy(f);
    if (total <= 0.0) return 0.0;
    const LowFreqMask& m = cached_low_mask(x.height, x.width, rho);
    const std::size_t plane = static_cast<std::size_t>(f.height) * f.width;
    double high = 0.0;
    for (int c = 0; c < f.channels; ++c) {
        const std::complex<float>* z = f.data.data() + c * plane;
        for (std::size_t i = 0; i < plane; ++i) {
            if (!m.bits[i]) {
                const double re = z[i].real(), im = z[i].imag();
                high += re * re + im * im;
            }
        }
    }
    return high / total;
}

std::pair<FeatureMap, FeatureMap> freeu_transform(const FeatureMap& backbone,
                                                  const FeatureMap& skip, const FreeUSpec& spec) {
    validate_spec(spec);
    FeatureMap b_out = backbone;
    for (float& v : b_out.data) v = static_cast<float>(v * spec.b);

    Spectrum f = fft2(skip);
    scale_low_band(f, cached_low_mask(skip.height, skip.width, spec.rho_skip), spec.s);
    return {std::move(b_out), ifft2(f)};
}

}  // namespace c3
