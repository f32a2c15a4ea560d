#include "c3/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "c3/io.hpp"
#include "c3/rng.hpp"
#include "httplib.h"
#include "json.hpp"

namespace c3 {

namespace {

constexpr std::uint64_t kAlignProjSeed = 0x616c69676e5f7631ULL;
constexpr int kAlignGrid = 16;
constexpr int kAlignDim = 64;

// Fixed 256 -> 64 Gaussian projection shared by every alignment call.
const std::vector<float>& align_projection() {
    static const std::vector<float> proj = [] {
        std::vector<float> p(static_cast<std::size_t>(kAlignDim) * kAlignGrid * kAlignGrid);
        RngStream rng(kAlignProjSeed, 0);
        for (float& v : p) v = rng.normal_f();
        return p;
    }();
    return proj;
}

// z-normalized 16x16 grayscale -> projected -> L2 normalized. Zero-variance
// images produce the zero vector, whose cosine against anything is 0.
std::vector<double> align_embed(const Image& img) {
    std::vector<float> gray = luminance(img);
    gray = resample_plane(gray, img.size, kAlignGrid);

    const std::size_t n = gray.size();
    double mean = 0.0;
    for (float v : gray) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (float v : gray) var += (v - mean) * (v - mean);
    const double stddev = std::sqrt(var / static_cast<double>(n));

    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = (gray[i] - mean) / (stddev + 1e-8);

    const std::vector<float>& proj = align_projection();
    std::vector<double> out(kAlignDim, 0.0);
    for (int o = 0; o < kAlignDim; ++o) {
        const float* row = proj.data() + static_cast<std::size_t>(o) * n;
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += row[i] * z[i];
        out[o] = acc;
    }
    double norm = 0.0;
    for (double v : out) norm += v * v;
    norm = std::sqrt(norm);
    if (norm > 1e-12) {
        for (double& v : out) v /= norm;
    } else {
        std::fill(out.begin(), out.end(), 0.0);
    }
    return out;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

double usability(const Image& image, const UsabilityContext& ctx, const ScorerBundle& bundle) {
    return bundle.aesthetic(image) + bundle.alignment(image, ctx);
}

double aesthetic_proxy(const Image& image, const AestheticWeights& w) {
    const int n = image.size;
    const std::size_t plane = static_cast<std::size_t>(n) * n;
    const float* r = image.data.data();
    const float* g = r + plane;
    const float* b = g + plane;

    const std::vector<float> y = luminance(image);

    double y_mean = 0.0;
    for (float v : y) y_mean += v;
    y_mean /= static_cast<double>(plane);
    double y_var = 0.0;
    for (float v : y) y_var += (v - y_mean) * (v - y_mean);
    const double contrast = std::sqrt(y_var / static_cast<double>(plane));

    // Colorfulness from opponent channels rg = R-G, yb = (R+G)/2 - B.
    double rg_mean = 0.0, yb_mean = 0.0;
    for (std::size_t i = 0; i < plane; ++i) {
        rg_mean += r[i] - g[i];
        yb_mean += 0.5 * (r[i] + g[i]) - b[i];
    }
    rg_mean /= static_cast<double>(plane);
    yb_mean /= static_cast<double>(plane);
    double rg_var = 0.0, yb_var = 0.0;
    for (std::size_t i = 0; i < plane; ++i) {
        const double rg = r[i] - g[i], yb = 0.5 * (r[i] + g[i]) - b[i];
        rg_var += (rg - rg_mean) * (rg - rg_mean);
        yb_var += (yb - yb_mean) * (yb - yb_mean);
    }
    rg_var /= static_cast<double>(plane);
    yb_var /= static_cast<double>(plane);
    const double colorfulness = std::sqrt(rg_var + yb_var) +
                                0.3 * std::sqrt(rg_mean * rg_mean + yb_mean * yb_mean);

    // Mean absolute Laplacian over interior pixels.
    double noise = 0.0;
    if (n > 2) {
        for (int yy = 1; yy < n - 1; ++yy) {
            for (int xx = 1; xx < n - 1; ++xx) {
                const std::size_t i = static_cast<std::size_t>(yy) * n + xx;
                noise += std::abs(4.0 * y[i] - y[i - n] - y[i + n] - y[i - 1] - y[i + 1]);
            }
        }
        noise /= static_cast<double>(n - 2) * static_cast<double>(n - 2);
    }

    std::size_t clipped = 0;
    for (float v : image.data) {
        if (v < 0.005f || v > 0.995f) ++clipped;
    }
    const double clip_frac = static_cast<double>(clipped) / static_cast<double>(image.data.size());

    const double score_arg =
        w.a0 + w.a1 * contrast + w.a2 * colorfulness - w.a3 * noise - w.a4 * clip_frac;
    return 10.0 * logistic(score_arg);
}

double alignment_proxy(const Image& image, const UsabilityContext& ctx) {
    const std::vector<double> a = align_embed(image);
    const std::vector<double> b = align_embed(ctx.baseline_image);
    double cos = 0.0;
    for (int i = 0; i < kAlignDim; ++i) cos += a[i] * b[i];
    return 10.0 * std::max(0.0, cos);
}

ScorerBundle make_local_bundle() {
    ScorerBundle bundle;
    bundle.aesthetic = [](const Image& img) { return aesthetic_proxy(img); };
    bundle.alignment = [](const Image& img, const UsabilityContext& ctx) {
        return alignment_proxy(img, ctx);
    };
    bundle.source = ScorerSource::LocalProxy;
    return bundle;
}

std::pair<double, double> score_remote(const RemoteScorerConfig& cfg, const Image& image,
                                       const std::string& concept_name) {
    nlohmann::json body;
    body["concept"] = concept_name;
    body["width"] = image.size;
    body["height"] = image.size;
    body["pixels_b64"] =
        base64_encode(image.data.data(), image.data.size() * sizeof(float));
    const std::string payload = body.dump();

    std::string last_error = "no attempt made";
    for (int attempt = 0; attempt <= cfg.retries; ++attempt) {
        httplib::Client client(cfg.endpoint);
        client.set_connection_timeout(0, cfg.timeout_ms * 1000);
        client.set_read_timeout(cfg.timeout_ms / 1000, (cfg.timeout_ms % 1000) * 1000);
        client.set_write_timeout(cfg.timeout_ms / 1000, (cfg.timeout_ms % 1000) * 1000);

        auto res = client.Post("/score", payload, "application/json");
        if (!res) {
            last_error = "no response from " + cfg.endpoint;
            continue;
        }
        if (res->status != 200) {
            last_error = "status " + std::to_string(res->status) + " from " + cfg.endpoint;
            continue;
        }
        nlohmann::json reply = nlohmann::json::parse(res->body, nullptr, /*allow_exceptions=*/false);
        if (reply.is_discarded() || !reply.contains("aesthetic") || !reply.contains("alignment") ||
            !reply["aesthetic"].is_number() || !reply["alignment"].is_number()) {
            throw ProtocolError("malformed scorer response: " + res->body.substr(0, 200));
        }
        const double a = std::clamp(reply["aesthetic"].get<double>(), 0.0, 10.0);
        const double al = std::clamp(reply["alignment"].get<double>(), 0.0, 10.0);
        return {a, al};
    }
    throw ScorerUnavailableError("scorer unavailable after " + std::to_string(cfg.retries) +
                                 " retries: " + last_error);
}

ScorerBundle make_remote_bundle(const RemoteScorerConfig& cfg) {
    ScorerBundle bundle;
    bundle.source = ScorerSource::Remote;
    bundle.aesthetic = [cfg](const Image& img) {
        try {
            return score_remote(cfg, img, "").first;
        } catch (const ScorerUnavailableError&) {
            if (!cfg.fallback_to_proxy) throw;
            return aesthetic_proxy(img);
        }
    };
    bundle.alignment = [cfg](const Image& img, const UsabilityContext& ctx) {
        try {
            return score_remote(cfg, img, ctx.conditioning.prompt_text()).second;
        } catch (const ScorerUnavailableError&) {
            if (!cfg.fallback_to_proxy) throw;
            return alignment_proxy(img, ctx);
        }
    };
    return bundle;
}

}  // namespace c3
