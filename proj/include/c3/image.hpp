#pragma once

#include <string>
#include <vector>

#include "c3/errors.hpp"

namespace c3 {

/// Square RGB image, channel-major planes, values clamped to [0, 1].
struct Image {
    int size = 0;
    std::vector<float> data;  // 3 * size * size

    Image() = default;
    explicit Image(int s) : size(s), data(static_cast<std::size_t>(3) * s * s, 0.0f) {}

    float& at(int c, int y, int x) {
        return data[(static_cast<std::size_t>(c) * size + y) * size + x];
    }
    float at(int c, int y, int x) const {
        return data[(static_cast<std::size_t>(c) * size + y) * size + x];
    }
};

/// Binary PPM (P6), 8-bit, byte value = round(255 * clamped float).
void write_ppm(const std::string& path, const Image& img);
Image read_ppm(const std::string& path);

/// Grayscale luminance plane (0.299 R + 0.587 G + 0.114 B), row-major.
std::vector<float> luminance(const Image& img);

/// Area-average resample of one plane between power-of-two sizes.
std::vector<float> resample_plane(const std::vector<float>& src, int src_size, int dst_size);

}  // namespace c3
