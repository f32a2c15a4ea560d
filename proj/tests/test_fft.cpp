#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>

#include "c3/fft.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace c3;

namespace {

// Definition-direct O(N^4) DFT, the independent reference for fft2.
Spectrum naive_dft2(const FeatureMap& x) {
    Spectrum out(x.channels, x.height, x.width);
    const double two_pi = 2.0 * 3.14159265358979323846;
    for (int c = 0; c < x.channels; ++c) {
        for (int u = 0; u < x.height; ++u) {
            for (int v = 0; v < x.width; ++v) {
                std::complex<double> acc = 0.0;
                for (int y = 0; y < x.height; ++y) {
                    for (int xx = 0; xx < x.width; ++xx) {
                        const double ang = -two_pi * (static_cast<double>(u) * y / x.height +
                                                      static_cast<double>(v) * xx / x.width);
                        acc += static_cast<double>(x.at(c, y, xx)) *
                               std::complex<double>(std::cos(ang), std::sin(ang));
                    }
                }
                out.at(c, u, v) = {static_cast<float>(acc.real()), static_cast<float>(acc.imag())};
            }
        }
    }
    return out;
}

double max_spec_diff(const Spectrum& a, const Spectrum& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        m = std::max(m, static_cast<double>(std::abs(a.data[i] - b.data[i])));
    }
    return m;
}

double spatial_energy(const FeatureMap& x) {
    double e = 0.0;
    for (float v : x.data) e += static_cast<double>(v) * v;
    return e;
}

}  // namespace

TEST_CASE("unit impulse transforms to the all-ones spectrum") {
    FeatureMap x(1, 4, 4);
    x.at(0, 0, 0) = 1.0f;
    const Spectrum f = fft2(x);
    for (const auto& z : f.data) {
        CHECK(std::abs(z.real() - 1.0f) < 1e-6);
        CHECK(std::abs(z.imag()) < 1e-6);
    }
}

TEST_CASE("constant map concentrates at DC") {
    const float c = 2.75f;
    FeatureMap x(1, 8, 8);
    for (float& v : x.data) v = c;
    const Spectrum f = fft2(x);
    CHECK(std::abs(f.at(0, 0, 0).real() - 64.0f * c) < 1e-4);
    for (int u = 0; u < 8; ++u) {
        for (int v = 0; v < 8; ++v) {
            if (u == 0 && v == 0) continue;
            CHECK(std::abs(f.at(0, u, v)) < 1e-5 * 64.0f * c);
        }
    }
}

TEST_CASE("fft2 matches the naive DFT oracle") {
    const FeatureMap x = test::random_map(1, 8, 8, 11);
    CHECK(max_spec_diff(fft2(x), naive_dft2(x)) < 1e-4);
}

TEST_CASE("ifft2(fft2(x)) round trips") {
    const FeatureMap x = test::random_map(8, 32, 32, 5);
    CHECK(test::max_abs_diff(ifft2(fft2(x)), x) < 1e-4);
}

TEST_CASE("all-ones spectrum inverts to the unit impulse") {
    Spectrum f(1, 4, 4);
    for (auto& z : f.data) z = {1.0f, 0.0f};
    const FeatureMap x = ifft2(f);
    CHECK(std::abs(x.at(0, 0, 0) - 1.0f) < 1e-6);
    for (int y = 0; y < 4; ++y) {
        for (int xx = 0; xx < 4; ++xx) {
            if (y == 0 && xx == 0) continue;
            CHECK(std::abs(x.at(0, y, xx)) < 1e-6);
        }
    }
}

TEST_CASE("non-Hermitian spectrum is rejected") {
    // Single off-DC coefficient whose conjugate partner stays zero.
    Spectrum f(1, 4, 4);
    f.at(0, 1, 2) = {1.0f, 0.5f};
    CHECK_THROWS_AS(ifft2(f), SymmetryError);
}

TEST_CASE("non power-of-two dims are rejected") {
    FeatureMap x(1, 6, 8);
    x.data.assign(48, 0.0f);
    CHECK_THROWS_AS(fft2(x), DimensionError);
    FeatureMap y(1, 8, 1);
    y.data.assign(8, 0.0f);
    CHECK_THROWS_AS(fft2(y), DimensionError);
}

TEST_CASE("spectral energy basics") {
    Spectrum zero(2, 4, 4);
    CHECK(spectral_energy(zero) == 0.0);

    FeatureMap impulse(1, 4, 4);
    impulse.at(0, 0, 0) = 1.0f;
    CHECK(std::abs(spectral_energy(fft2(impulse)) - 16.0) < 1e-6);
}

TEST_CASE("Parseval identity holds") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const FeatureMap x = test::random_map(3, 16, 32, seed);
        const double spatial = spatial_energy(x);
        const double spectral = spectral_energy(fft2(x)) / (16.0 * 32.0);
        CHECK(std::abs(spatial - spectral) / (spatial + 1e-12) < 1e-5);
    }
}

TEST_CASE("fft2 is linear") {
    const FeatureMap x = test::random_map(2, 16, 16, 21);
    const FeatureMap y = test::random_map(2, 16, 16, 22);
    for (const auto& [a, b] : {std::pair{2.5, -1.5}, std::pair{10.0, 0.25}, std::pair{-10.0, 10.0}}) {
        FeatureMap mix(2, 16, 16);
        for (std::size_t i = 0; i < mix.data.size(); ++i) {
            mix.data[i] = static_cast<float>(a * x.data[i] + b * y.data[i]);
        }
        const Spectrum fm = fft2(mix);
        const Spectrum fx = fft2(x);
        const Spectrum fy = fft2(y);
        double max_diff = 0.0;
        for (std::size_t i = 0; i < fm.data.size(); ++i) {
            const std::complex<double> want =
                a * std::complex<double>(fx.data[i]) + b * std::complex<double>(fy.data[i]);
            max_diff = std::max(max_diff, std::abs(std::complex<double>(fm.data[i]) - want));
        }
        CHECK(max_diff < 1e-4 * 50.0);  // coefficients reach O(50) at |a| = 10
    }
}

TEST_CASE("spectra of real maps are Hermitian") {
    const FeatureMap x = test::random_map(2, 8, 16, 31);
    const Spectrum f = fft2(x);
    for (int c = 0; c < 2; ++c) {
        for (int u = 0; u < 8; ++u) {
            for (int v = 0; v < 16; ++v) {
                const std::complex<float> a = f.at(c, u, v);
                const std::complex<float> b = std::conj(f.at(c, (8 - u) % 8, (16 - v) % 16));
                CHECK(std::abs(a - b) <= 1e-4 * std::max(1.0f, std::abs(a)));
            }
        }
    }
}
