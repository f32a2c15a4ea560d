#include "c3/fft.hpp"

#include <cmath>
#include <complex>
#include <vector>

namespace c3 {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Iterative radix-2 Cooley-Tukey, in place, double accumulation throughout.
// Twiddles come from a per-size table so precision does not drift with n.
void fft_pass(std::complex<double>* a, int n, const std::vector<std::complex<double>>& table) {
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        const int step = n / len;
        for (int i = 0; i < n; i += len) {
            for (int j = 0; j < len / 2; ++j) {
                const std::complex<double> w = table[static_cast<std::size_t>(j) * step];
                const std::complex<double> u = a[i + j];
                const std::complex<double> v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
            }
        }
    }
}

std::vector<std::complex<double>> twiddle_table(int n, bool inverse) {
    std::vector<std::complex<double>> table(static_cast<std::size_t>(n) / 2);
    const double sign = inverse ? 1.0 : -1.0;
    for (int j = 0; j < n / 2; ++j) {
        const double ang = sign * 2.0 * kPi * j / n;
        table[j] = {std::cos(ang), std::sin(ang)};
    }
    return table;
}

// 2D transform of one channel: rows, then columns.
void fft2_channel(std::vector<std::complex<double>>& grid, int h, int w, bool inverse) {
    const auto row_tw = twiddle_table(w, inverse);
    const auto col_tw = (h == w) ? row_tw : twiddle_table(h, inverse);
    for (int y = 0; y < h; ++y) {
        fft_pass(grid.data() + static_cast<std::size_t>(y) * w, w, row_tw);
    }
    std::vector<std::complex<double>> col(h);
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) col[y] = grid[static_cast<std::size_t>(y) * w + x];
        fft_pass(col.data(), h, col_tw);
        for (int y = 0; y < h; ++y) grid[static_cast<std::size_t>(y) * w + x] = col[y];
    }
}

}  // namespace

Spectrum fft2(const FeatureMap& x) {
    require_pow2_dims(x.height, x.width, "fft2");
    Spectrum out(x.channels, x.height, x.width);
    const std::size_t plane = static_cast<std::size_t>(x.height) * x.width;
    std::vector<std::complex<double>> grid(plane);
    for (int c = 0; c < x.channels; ++c) {
        const float* src = x.data.data() + c * plane;
        for (std::size_t i = 0; i < plane; ++i) grid[i] = {static_cast<double>(src[i]), 0.0};
        fft2_channel(grid, x.height, x.width, /*inverse=*/false);
        std::complex<float>* dst = out.data.data() + c * plane;
        for (std::size_t i = 0; i < plane; ++i) {
            dst[i] = {static_cast<float>(grid[i].real()), static_cast<float>(grid[i].imag())};
        }
    }
    return out;
}

FeatureMap ifft2(const Spectrum& f) {
    require_pow2_dims(f.height, f.width, "ifft2");
    FeatureMap out(f.channels, f.height, f.width);
    const std::size_t plane = static_cast<std::size_t>(f.height) * f.width;
    const double norm = 1.0 / (static_cast<double>(f.height) * f.width);

    std::vector<std::complex<double>> grid(plane);
    double sum_sq_real = 0.0;
    double max_imag = 0.0;
    for (int c = 0; c < f.channels; ++c) {
        const std::complex<float>* src = f.data.data() + c * plane;
        for (std::size_t i = 0; i < plane; ++i) {
            grid[i] = {static_cast<double>(src[i].real()), static_cast<double>(src[i].imag())};
        }
        fft2_channel(grid, f.height, f.width, /*inverse=*/true);
        float* dst = out.data.data() + c * plane;
        for (std::size_t i = 0; i < plane; ++i) {
            const double re = grid[i].real() * norm;
            const double im = grid[i].imag() * norm;
            sum_sq_real += re * re;
            max_imag = std::max(max_imag, std::abs(im));
            dst[i] = static_cast<float>(re);
        }
    }
    const double rms = std::sqrt(sum_sq_real / static_cast<double>(out.size()));
    if (max_imag > 1e-4 * rms) {
        throw SymmetryError("ifft2: imaginary residual " + std::to_string(max_imag) +
                            " exceeds 1e-4 * RMS(" + std::to_string(rms) +
                            "); spectrum is not Hermitian");
    }
    return out;
}

double spectral_energy(const Spectrum& f) {
    double e = 0.0;
    for (const auto& z : f.data) {
        const double re = z.real(), im = z.imag();
        e += re * re + im * im;
    }
    return e;
}

}  // namespace c3
