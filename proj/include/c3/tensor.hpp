#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "c3/errors.hpp"

namespace c3 {

constexpr bool is_pow2(int n) { return n >= 1 && (n & (n - 1)) == 0; }

/// Dense real activation tensor, channel-major then row-major.
/// Spatial dims must be powers of two (>= 2) before any spectral operation.
struct FeatureMap {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<float> data;

    FeatureMap() = default;
    FeatureMap(int c, int h, int w)
        : channels(c), height(h), width(w), data(static_cast<std::size_t>(c) * h * w, 0.0f) {}

    float& at(int c, int y, int x) {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
    float at(int c, int y, int x) const {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
    std::size_t size() const { return data.size(); }

    bool same_shape(const FeatureMap& o) const {
        return channels == o.channels && height == o.height && width == o.width;
    }
};

/// Per-channel 2D DFT of a FeatureMap, standard unshifted layout ((0,0) = DC).
struct Spectrum {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<std::complex<float>> data;

    Spectrum() = default;
    Spectrum(int c, int h, int w)
        : channels(c), height(h), width(w), data(static_cast<std::size_t>(c) * h * w) {}

    std::complex<float>& at(int c, int u, int v) {
        return data[(static_cast<std::size_t>(c) * height + u) * width + v];
    }
    std::complex<float> at(int c, int u, int v) const {
        return data[(static_cast<std::size_t>(c) * height + u) * width + v];
    }
};

/// Throws DimensionError unless both spatial dims are powers of two >= 2.
void require_pow2_dims(int height, int width, const char* who);

// --- binary tensor file ("C3TF", version 1, little-endian) ---------------

/// Generic rank-N writer: magic, u32 version, u8 rank, u32 dims, f32 payload.
void save_tensor_file(const std::string& path, const std::vector<std::uint32_t>& dims,
                      const float* payload);

struct RawTensor {
    std::vector<std::uint32_t> dims;
    std::vector<float> data;
};

RawTensor load_tensor_file(const std::string& path);

void save_tensor(const std::string& path, const FeatureMap& x);
FeatureMap load_tensor(const std::string& path);

}  // namespace c3
