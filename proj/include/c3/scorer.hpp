#pragma once

#include <functional>
#include <string>
#include <utility>

#include "c3/denoiser.hpp"
#include "c3/image.hpp"

namespace c3 {

/// Everything an alignment scorer may need: the prompt and the same-seed
/// unamplified image the candidate is compared against.
struct UsabilityContext {
    ConditioningSpec conditioning;
    Image baseline_image;
};

enum class ScorerSource { LocalProxy, Remote };

/// A pair of total, non-negative scorers in [0, 10] each. usability() only
/// ever sees the two scalars, so local and remote bundles are interchangeable.
struct ScorerBundle {
    std::function<double(const Image&)> aesthetic;
    std::function<double(const Image&, const UsabilityContext&)> alignment;
    ScorerSource source = ScorerSource::LocalProxy;
};

/// aesthetic(image) + alignment(image, ctx); range [0, 20].
double usability(const Image& image, const UsabilityContext& ctx, const ScorerBundle& bundle);

struct AestheticWeights {
    double a0 = 0, a1 = 6, a2 = 2, a3 = 12, a4 = 4;
};

/// Heuristic quality score in [0, 10]: logistic blend of luminance contrast,
/// colorfulness, Laplacian noise, and clipped-value fraction.
double aesthetic_proxy(const Image& image, const AestheticWeights& w = {});

/// Recognizability retained relative to the same-seed baseline:
/// 10 * max(0, cos) between fixed random projections of the z-normalized
/// 16x16 box-downsampled grayscale images.
double alignment_proxy(const Image& image, const UsabilityContext& ctx);

ScorerBundle make_local_bundle();

struct RemoteScorerConfig {
    std::string endpoint;  // e.g. "http://127.0.0.1:8044"
    int timeout_ms = 10000;
    int retries = 2;
    bool fallback_to_proxy = false;
};

/// POST {endpoint}/score with the raw pixel payload; returns (aesthetic,
/// alignment) clamped to [0, 10]. Throws ScorerUnavailableError after the
/// configured retries, ProtocolError on malformed responses.
std::pair<double, double> score_remote(const RemoteScorerConfig& cfg, const Image& image,
                                       const std::string& concept_name);

ScorerBundle make_remote_bundle(const RemoteScorerConfig& cfg);

}  // namespace c3
