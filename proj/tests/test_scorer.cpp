#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <atomic>
#include <cmath>
#include <thread>

#include "c3/io.hpp"
#include "c3/scorer.hpp"
#include "doctest.h"
#include "helpers.hpp"
#include "httplib.h"
#include "json.hpp"

using namespace c3;

namespace {

Image constant_image(int size, float value) {
    Image img(size);
    for (float& v : img.data) v = value;
    return img;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// In-process scorer endpoint with a scriptable handler.
struct MockServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::atomic<int> hits{0};

    explicit MockServer(std::function<void(int, const httplib::Request&, httplib::Response&)> fn) {
        server.Post("/score", [this, fn](const httplib::Request& req, httplib::Response& res) {
            fn(hits.fetch_add(1), req, res);
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~MockServer() {
        server.stop();
        thread.join();
    }
    std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port); }
};

RemoteScorerConfig remote_config(const std::string& endpoint, bool fallback = false) {
    RemoteScorerConfig cfg;
    cfg.endpoint = endpoint;
    cfg.timeout_ms = 2000;
    cfg.retries = 2;
    cfg.fallback_to_proxy = fallback;
    return cfg;
}

}  // namespace

TEST_CASE("aesthetic: constant mid-gray scores exactly 5") {
    CHECK(aesthetic_proxy(constant_image(32, 0.5f)) == doctest::Approx(5.0).epsilon(1e-9));
}

TEST_CASE("aesthetic: all-white collapses through the clip penalty") {
    const double want = 10.0 * logistic(-4.0);  // contrast, color and noise all vanish
    CHECK(aesthetic_proxy(constant_image(32, 1.0f)) == doctest::Approx(want).epsilon(1e-6));
    CHECK(want == doctest::Approx(0.17986).epsilon(1e-3));
}

TEST_CASE("aesthetic: checkerboard noise pushes the score below 5") {
    Image img(32);
    for (int y = 0; y < 32; ++y) {
        for (int x = 0; x < 32; ++x) {
            const float v = ((x + y) % 2 == 0) ? 0.25f : 0.75f;  // stay off the clip bins
            for (int c = 0; c < 3; ++c) img.at(c, y, x) = v;
        }
    }
    CHECK(aesthetic_proxy(img) < 5.0);
}

TEST_CASE("aesthetic stays within [0, 10] on arbitrary images") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const double s = aesthetic_proxy(test::random_image(32, seed));
        CHECK(s >= 0.0);
        CHECK(s <= 10.0);
    }
}

TEST_CASE("alignment: identical non-constant images score 10") {
    const Image img = test::random_image(32, 3);
    const UsabilityContext ctx{ConditioningSpec{}, img};
    CHECK(alignment_proxy(img, ctx) == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("alignment: inverted image clamps to 0") {
    const Image img = test::random_image(32, 4);
    Image inverted = img;
    for (float& v : inverted.data) v = 1.0f - v;
    const UsabilityContext ctx{ConditioningSpec{}, img};
    CHECK(alignment_proxy(inverted, ctx) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("alignment: black vs white hits the zero-variance guard") {
    const UsabilityContext ctx{ConditioningSpec{}, constant_image(32, 1.0f)};
    CHECK(alignment_proxy(constant_image(32, 0.0f), ctx) == 0.0);
}

TEST_CASE("alignment: small perturbations stay above 9") {
    const Image base = test::random_image(32, 5);
    RngStream rng(6, 0);
    Image noisy = base;
    for (float& v : noisy.data) v += 0.01f * rng.normal_f();
    const UsabilityContext ctx{ConditioningSpec{}, base};
    CHECK(alignment_proxy(noisy, ctx) > 9.0);
}

TEST_CASE("alignment stays within [0, 10] on arbitrary pairs") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const UsabilityContext ctx{ConditioningSpec{}, test::random_image(32, seed + 100)};
        const double s = alignment_proxy(test::random_image(32, seed), ctx);
        CHECK(s >= 0.0);
        CHECK(s <= 10.0);
    }
}

TEST_CASE("remote scorer passes values through") {
    MockServer server([](int, const httplib::Request& req, httplib::Response& res) {
        const nlohmann::json body = nlohmann::json::parse(req.body);
        REQUIRE(body.at("concept") == "a creative chair");
        REQUIRE(body.at("width") == 8);
        REQUIRE(body.at("height") == 8);
        // Payload is raw little-endian f32, channel-major RGB.
        const auto bytes = base64_decode(body.at("pixels_b64").get<std::string>());
        REQUIRE(bytes.size() == 3u * 8 * 8 * sizeof(float));
        float first;
        std::memcpy(&first, bytes.data(), sizeof(float));
        REQUIRE(first == 0.25f);
        res.set_content(R"({"aesthetic": 6.2, "alignment": 8.1})", "application/json");
    });
    const auto [aest, align] =
        score_remote(remote_config(server.endpoint()), constant_image(8, 0.25f),
                     "a creative chair");
    CHECK(aest == 6.2);
    CHECK(align == 8.1);
}

TEST_CASE("remote scores clamp to [0, 10]") {
    MockServer server([](int, const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"aesthetic": 14.0, "alignment": -3.0})", "application/json");
    });
    const auto [aest, align] =
        score_remote(remote_config(server.endpoint()), constant_image(8, 0.5f), "x");
    CHECK(aest == 10.0);
    CHECK(align == 0.0);
}

TEST_CASE("persistent failures exhaust the retries") {
    MockServer server([](int, const httplib::Request&, httplib::Response& res) {
        res.status = 500;
    });
    CHECK_THROWS_AS(score_remote(remote_config(server.endpoint()), constant_image(8, 0.5f), "x"),
                    ScorerUnavailableError);
    CHECK(server.hits.load() == 3);  // initial attempt + 2 retries
}

TEST_CASE("transient failures are retried") {
    MockServer server([](int n, const httplib::Request&, httplib::Response& res) {
        if (n < 2) {
            res.status = 500;
            return;
        }
        res.set_content(R"({"aesthetic": 4.0, "alignment": 5.0})", "application/json");
    });
    const auto [aest, align] =
        score_remote(remote_config(server.endpoint()), constant_image(8, 0.5f), "x");
    CHECK(aest == 4.0);
    CHECK(align == 5.0);
    CHECK(server.hits.load() == 3);
}

TEST_CASE("malformed responses raise a protocol error") {
    MockServer server([](int, const httplib::Request&, httplib::Response& res) {
        res.set_content("not json at all", "application/json");
    });
    CHECK_THROWS_AS(score_remote(remote_config(server.endpoint()), constant_image(8, 0.5f), "x"),
                    ProtocolError);

    MockServer missing([](int, const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"aesthetic": "high"})", "application/json");
    });
    CHECK_THROWS_AS(score_remote(remote_config(missing.endpoint()), constant_image(8, 0.5f), "x"),
                    ProtocolError);
}

TEST_CASE("unreachable endpoint without fallback raises, with fallback proxies") {
    const RemoteScorerConfig dead = [] {
        RemoteScorerConfig cfg;
        cfg.endpoint = "http://127.0.0.1:1";  // nothing listens here
        cfg.timeout_ms = 200;
        cfg.retries = 0;
        return cfg;
    }();

    ScorerBundle strict = make_remote_bundle(dead);
    CHECK_THROWS_AS(strict.aesthetic(constant_image(32, 0.5f)), ScorerUnavailableError);

    RemoteScorerConfig soft = dead;
    soft.fallback_to_proxy = true;
    ScorerBundle bundle = make_remote_bundle(soft);
    CHECK(bundle.aesthetic(constant_image(32, 0.5f)) == doctest::Approx(5.0));
    const Image base = test::random_image(32, 9);
    CHECK(bundle.alignment(base, UsabilityContext{ConditioningSpec{}, base}) ==
          doctest::Approx(10.0));
}

TEST_CASE("usability only depends on the two scalars, not the source") {
    MockServer server([](int, const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"aesthetic": 3.5, "alignment": 6.5})", "application/json");
    });
    RemoteScorerConfig rc = remote_config(server.endpoint());
    const ScorerBundle remote = make_remote_bundle(rc);

    ScorerBundle local;
    local.source = ScorerSource::LocalProxy;
    local.aesthetic = [](const Image&) { return 3.5; };
    local.alignment = [](const Image&, const UsabilityContext&) { return 6.5; };

    const Image img = test::random_image(16, 12);
    const UsabilityContext ctx{ConditioningSpec{.concept_name = "chair"}, img};
    CHECK(usability(img, ctx, remote) == usability(img, ctx, local));
}
