#include "c3/mask.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>

#include "c3/tensor.hpp"

namespace c3 {

int LowFreqMask::count() const {
    int n = 0;
    for (std::uint8_t b : bits) n += b;
    return n;
}

LowFreqMask build_low_mask(int height, int width, double rho) {
    if (!(rho >= 0.0 && rho <= 1.0)) {
        throw DomainError("build_low_mask: cutoff ratio must lie in [0, 1], got " +
                          std::to_string(rho));
    }
    require_pow2_dims(height, width, "build_low_mask");

    LowFreqMask m;
    m.height = height;
    m.width = width;
    m.bits.assign(static_cast<std::size_t>(height) * width, 0);
    for (int u = 0; u < height; ++u) {
        const int su = (u <= height / 2) ? u : u - height;
        const double fu = std::abs(2.0 * su / height);
        for (int v = 0; v < width; ++v) {
            const int sv = (v <= width / 2) ? v : v - width;
            const double fv = std::abs(2.0 * sv / width);
            if (std::max(fu, fv) <= rho) {
                m.bits[static_cast<std::size_t>(u) * width + v] = 1;
            }
        }
    }
    return m;
}

const LowFreqMask& cached_low_mask(int height, int width, double rho) {
    static std::mutex mu;
    static std::map<std::tuple<int, int, double>, std::unique_ptr<LowFreqMask>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_tuple(height, width, rho);
    auto it = cache.find(key);
    if (it == cache.end()) {
        it = cache.emplace(key, std::make_unique<LowFreqMask>(build_low_mask(height, width, rho)))
                 .first;
    }
    return *it->second;
}

}  // namespace c3
