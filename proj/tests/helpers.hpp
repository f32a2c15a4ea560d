#pragma once

#include <cmath>
#include <complex>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "c3/image.hpp"
#include "c3/rng.hpp"
#include "c3/tensor.hpp"

namespace c3::test {

inline FeatureMap random_map(int c, int h, int w, std::uint64_t seed = 1) {
    RngStream rng(seed, 900);
    FeatureMap m(c, h, w);
    for (float& v : m.data) v = rng.normal_f();
    return m;
}

inline Image random_image(int size, std::uint64_t seed = 1) {
    RngStream rng(seed, 901);
    Image img(size);
    for (float& v : img.data) v = static_cast<float>(rng.uniform());
    return img;
}

inline double max_abs_diff(const FeatureMap& a, const FeatureMap& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        m = std::max(m, std::abs(static_cast<double>(a.data[i]) - b.data[i]));
    }
    return m;
}

inline double max_abs_diff(const Image& a, const Image& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        m = std::max(m, std::abs(static_cast<double>(a.data[i]) - b.data[i]));
    }
    return m;
}

inline double mean_abs_diff(const Image& a, const Image& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        s += std::abs(static_cast<double>(a.data[i]) - b.data[i]);
    }
    return s / static_cast<double>(a.data.size());
}

/// Unique scratch directory under the build tree; removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("c3_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    std::string str() const { return path_.string(); }
    std::filesystem::path path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace c3::test
