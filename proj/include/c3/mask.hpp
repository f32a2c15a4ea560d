#pragma once

#include <cstdint>
#include <vector>

#include "c3/errors.hpp"

namespace c3 {

/// Binary low-band selector over an unshifted spectrum. A coefficient (u, v)
/// is in the low band iff max(|2*su/H|, |2*sv/W|) <= rho, where su, sv are the
/// signed wrapped frequencies (k for k <= N/2, else k - N). rho = 0 keeps DC
/// only, rho = 1 passes everything. The selector is symmetric under frequency
/// negation, so masked spectra of real maps stay Hermitian.
struct LowFreqMask {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> bits;  // row-major over (u, v)

    bool at(int u, int v) const { return bits[static_cast<std::size_t>(u) * width + v] != 0; }
    int count() const;
};

/// Throws DomainError for rho outside [0, 1].
LowFreqMask build_low_mask(int height, int width, double rho);

/// Shared cache keyed by (height, width, rho); safe for concurrent use.
const LowFreqMask& cached_low_mask(int height, int width, double rho);

}  // namespace c3
