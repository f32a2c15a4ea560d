#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstring>
#include <fstream>

#include "c3/rng.hpp"
#include "c3/tensor.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace c3;

TEST_CASE("tensor file round trip is bit identical") {
    test::TempDir dir("tensor");
    const FeatureMap x = test::random_map(4, 8, 8, 7);
    const std::string path = dir.str() + "/x.c3tf";
    save_tensor(path, x);
    const FeatureMap y = load_tensor(path);
    REQUIRE(y.channels == 4);
    REQUIRE(y.height == 8);
    REQUIRE(y.width == 8);
    CHECK(std::memcmp(x.data.data(), y.data.data(), x.data.size() * sizeof(float)) == 0);
}

TEST_CASE("bad magic is rejected") {
    test::TempDir dir("tensor");
    const std::string path = dir.str() + "/bad.c3tf";
    std::ofstream f(path, std::ios::binary);
    f << "XXXX";
    f.close();
    CHECK_THROWS_AS(load_tensor(path), FormatError);
}

TEST_CASE("version mismatch is rejected") {
    test::TempDir dir("tensor");
    const FeatureMap x = test::random_map(1, 2, 2);
    const std::string path = dir.str() + "/v.c3tf";
    save_tensor(path, x);
    // Flip the version field (offset 4).
    std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
    f.seekp(4);
    const char two = 2;
    f.write(&two, 1);
    f.close();
    CHECK_THROWS_AS(load_tensor(path), FormatError);
}

TEST_CASE("payload length arithmetic") {
    test::TempDir dir("tensor");
    // rank 3, dims (2, 4, 4): 32 floats = 128 payload bytes.
    std::vector<float> payload(32, 1.5f);
    const std::string good = dir.str() + "/good.c3tf";
    save_tensor_file(good, {2, 4, 4}, payload.data());
    CHECK(load_tensor(good).data.size() == 32);

    // Truncate the payload to 127 bytes.
    const std::string bad = dir.str() + "/bad.c3tf";
    std::ifstream in(good, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    bytes.pop_back();
    std::ofstream out(bad, std::ios::binary);
    out << bytes;
    out.close();
    CHECK_THROWS_AS(load_tensor(bad), FormatError);
    CHECK_THROWS_WITH_AS(load_tensor(bad), doctest::Contains("truncated payload"), FormatError);
}

TEST_CASE("rng streams repeat exactly for equal (seed, id)") {
    RngStream a(42, 7), b(42, 7);
    for (int i = 0; i < 10000; ++i) {
        REQUIRE(a.next_u64() == b.next_u64());
    }
}

TEST_CASE("rng streams with different ids diverge almost everywhere") {
    RngStream a(42, 7), b(42, 8);
    int same = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        if (a.next_u64() == b.next_u64()) ++same;
    }
    CHECK(same <= n / 100);  // >= 99% of positions differ
}

TEST_CASE("rng uniform and normal are in sane ranges") {
    RngStream rng(3, 0);
    double mean = 0.0, var = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
    }
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        mean += z;
        var += z * z;
    }
    mean /= n;
    var = var / n - mean * mean;
    CHECK(std::abs(mean) < 0.05);
    CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("fnv1a64 differs across strings") {
    CHECK(fnv1a64("chair") != fnv1a64("table"));
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
}
