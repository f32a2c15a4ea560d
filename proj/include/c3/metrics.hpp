#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "c3/image.hpp"
#include "c3/scorer.hpp"
#include "json.hpp"

namespace c3 {

/// L2-normalized embedding; 96 dims from the standard Embedder, but the
/// metric functions accept any fixed dimension.
using FeatureVector = std::vector<double>;

/// Deterministic multi-scale image embedder: RGB box-downsampled to 32, 16,
/// and 8, each scale projected to 32 dims by a seeded Gaussian matrix, the
/// concatenation L2-normalized.
struct Embedder {
    std::uint64_t embed_seed = 0;
    std::vector<std::vector<float>> projections;  // one 32 x (3*s*s) matrix per scale
    static constexpr int kScales[3] = {32, 16, 8};
    static constexpr int kDimsPerScale = 32;

    static Embedder build(std::uint64_t seed);
};

FeatureVector embed_image(const Image& image, const Embedder& e);

struct GaussianMoments {
    int dim = 0;
    std::vector<double> mean;
    std::vector<double> cov;  // row-major dim x dim, unbiased estimator

    static GaussianMoments fit(const std::vector<FeatureVector>& samples);
};

/// Frechet distance between Gaussians:
/// |mu_a - mu_b|^2 + tr(Sa) + tr(Sb) - 2 tr((Sa^1/2 Sb Sa^1/2)^1/2),
/// clamped to >= 0; matrix roots via symmetric eigendecomposition.
double frechet(const GaussianMoments& a, const GaussianMoments& b);

/// Manifold precision/recall with k-NN radii (distance to the k-th nearest
/// neighbor within the point's own set, excluding itself). Brute force.
std::pair<double, double> knn_precision_recall(const std::vector<FeatureVector>& real,
                                               const std::vector<FeatureVector>& fake, int k);

/// Mean of 1 - cos over all unordered embedding pairs; range [0, 2].
double pairwise_diversity_features(const std::vector<FeatureVector>& features);
double pairwise_diversity(const std::vector<Image>& images, const Embedder& e);

/// exp of the Shannon entropy of the eigenvalues of the cosine Gram matrix
/// divided by n; 1 for identical inputs, n for mutually orthogonal ones.
double vendi_score(const std::vector<FeatureVector>& features);

struct MetricsReport {
    int n_real = 0;
    int n_fake = 0;
    int k = 0;
    double fid_star = 0;
    double precision_star = 0;
    double recall = 0;
    double lpips_mean = 0;
    double vendi = 0;
    double alignment_mean = 0;
    std::optional<double> blip;          // populated only by remote scorers
    std::optional<double> ref_fid_star;  // plain set vs reference-concept set

    nlohmann::json to_json() const;
    static MetricsReport from_json(const nlohmann::json& j);

    static std::vector<std::string> csv_header();
    std::vector<std::string> csv_cells() const;
};

/// Full battery over a plain set (stands in for "real") and an amplified set,
/// with per-index baselines for the alignment mean.
MetricsReport build_report(const std::vector<Image>& plain, const std::vector<Image>& amplified,
                           const std::vector<Image>& baselines, const Embedder& e, int k,
                           const ScorerBundle& bundle, const ConditioningSpec& cond);

}  // namespace c3
