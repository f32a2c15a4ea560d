#include "c3/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace c3 {

void write_ppm(const std::string& path, const Image& img) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << "P6\n" << img.size << " " << img.size << "\n255\n";
    std::vector<unsigned char> row(static_cast<std::size_t>(img.size) * 3);
    for (int y = 0; y < img.size; ++y) {
        for (int x = 0; x < img.size; ++x) {
            for (int c = 0; c < 3; ++c) {
                const float v = std::clamp(img.at(c, y, x), 0.0f, 1.0f);
                row[static_cast<std::size_t>(x) * 3 + c] =
                    static_cast<unsigned char>(std::lround(255.0f * v));
            }
        }
        f.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
    if (!f) throw IoError("short write: " + path);
}

Image read_ppm(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for reading: " + path);
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    f >> magic >> w >> h >> maxval;
    if (magic != "P6" || maxval != 255 || w != h || w <= 0) {
        throw FormatError("unsupported PPM header in " + path);
    }
    f.get();  // single whitespace after header
    Image img(w);
    std::vector<unsigned char> row(static_cast<std::size_t>(w) * 3);
    for (int y = 0; y < h; ++y) {
        f.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
        if (!f) throw FormatError("truncated PPM payload in " + path);
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < 3; ++c) {
                img.at(c, y, x) = static_cast<float>(row[static_cast<std::size_t>(x) * 3 + c]) / 255.0f;
            }
        }
    }
    return img;
}

std::vector<float> luminance(const Image& img) {
    const std::size_t plane = static_cast<std::size_t>(img.size) * img.size;
    std::vector<float> y(plane);
    for (std::size_t i = 0; i < plane; ++i) {
        y[i] = 0.299f * img.data[i] + 0.587f * img.data[plane + i] +
               0.114f * img.data[2 * plane + i];
    }
    return y;
}

std::vector<float> resample_plane(const std::vector<float>& src, int src_size, int dst_size) {
    if (src_size == dst_size) return src;
    std::vector<float> dst(static_cast<std::size_t>(dst_size) * dst_size, 0.0f);
    if (src_size > dst_size) {
        const int box = src_size / dst_size;
        const float inv = 1.0f / static_cast<float>(box * box);
        for (int y = 0; y < dst_size; ++y) {
            for (int x = 0; x < dst_size; ++x) {
                float acc = 0.0f;
                for (int dy = 0; dy < box; ++dy) {
                    for (int dx = 0; dx < box; ++dx) {
                        acc += src[static_cast<std::size_t>(y * box + dy) * src_size + x * box + dx];
                    }
                }
                dst[static_cast<std::size_t>(y) * dst_size + x] = acc * inv;
            }
        }
    } else {
        const int rep = dst_size / src_size;
        for (int y = 0; y < dst_size; ++y) {
            for (int x = 0; x < dst_size; ++x) {
                dst[static_cast<std::size_t>(y) * dst_size + x] =
                    src[static_cast<std::size_t>(y / rep) * src_size + x / rep];
            }
        }
    }
    return dst;
}

}  // namespace c3
