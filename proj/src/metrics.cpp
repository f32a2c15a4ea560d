#include "c3/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "c3/io.hpp"
#include "c3/linalg.hpp"
#include "c3/rng.hpp"

namespace c3 {

Embedder Embedder::build(std::uint64_t seed) {
    Embedder e;
    e.embed_seed = seed;
    for (int si = 0; si < 3; ++si) {
        const int s = kScales[si];
        const std::size_t in_dim = static_cast<std::size_t>(3) * s * s;
        std::vector<float> proj(static_cast<std::size_t>(kDimsPerScale) * in_dim);
        RngStream rng(seed, static_cast<std::uint64_t>(si));
        const double stddev = 1.0 / std::sqrt(static_cast<double>(in_dim));
        for (float& v : proj) v = static_cast<float>(rng.normal() * stddev);
        e.projections.push_back(std::move(proj));
    }
    return e;
}

FeatureVector embed_image(const Image& image, const Embedder& e) {
    FeatureVector out;
    out.reserve(3 * Embedder::kDimsPerScale);
    const std::size_t plane = static_cast<std::size_t>(image.size) * image.size;

    for (int si = 0; si < 3; ++si) {
        const int s = Embedder::kScales[si];
        std::vector<float> rgb;
        rgb.reserve(static_cast<std::size_t>(3) * s * s);
        for (int c = 0; c < 3; ++c) {
            std::vector<float> ch(image.data.begin() + c * plane,
                                  image.data.begin() + (c + 1) * plane);
            std::vector<float> small = resample_plane(ch, image.size, s);
            rgb.insert(rgb.end(), small.begin(), small.end());
        }
        const std::vector<float>& proj = e.projections[si];
        const std::size_t in_dim = rgb.size();
        for (int o = 0; o < Embedder::kDimsPerScale; ++o) {
            const float* row = proj.data() + static_cast<std::size_t>(o) * in_dim;
            double acc = 0.0;
            for (std::size_t i = 0; i < in_dim; ++i) acc += static_cast<double>(row[i]) * rgb[i];
            out.push_back(acc);
        }
    }
    double norm = 0.0;
    for (double v : out) norm += v * v;
    norm = std::sqrt(norm);
    if (norm > 1e-12) {
        for (double& v : out) v /= norm;
    } else {
        out.assign(out.size(), 0.0);
        out[0] = 1.0;
    }
    return out;
}

GaussianMoments GaussianMoments::fit(const std::vector<FeatureVector>& samples) {
    if (samples.size() < 2) throw DomainError("moment fit needs at least 2 samples");
    const int dim = static_cast<int>(samples[0].size());
    const double n = static_cast<double>(samples.size());

    GaussianMoments m;
    m.dim = dim;
    m.mean.assign(dim, 0.0);
    for (const FeatureVector& v : samples) {
        for (int i = 0; i < dim; ++i) m.mean[i] += v[i];
    }
    for (double& x : m.mean) x /= n;

    m.cov.assign(static_cast<std::size_t>(dim) * dim, 0.0);
    for (const FeatureVector& v : samples) {
        for (int i = 0; i < dim; ++i) {
            const double di = v[i] - m.mean[i];
            for (int j = i; j < dim; ++j) {
                m.cov[static_cast<std::size_t>(i) * dim + j] += di * (v[j] - m.mean[j]);
            }
        }
    }
    for (int i = 0; i < dim; ++i) {
        for (int j = i; j < dim; ++j) {
            const double c = m.cov[static_cast<std::size_t>(i) * dim + j] / (n - 1.0);
            m.cov[static_cast<std::size_t>(i) * dim + j] = c;
            m.cov[static_cast<std::size_t>(j) * dim + i] = c;
        }
    }
    return m;
}

double frechet(const GaussianMoments& a, const GaussianMoments& b) {
    if (a.dim != b.dim) throw DimensionError("frechet: moment dimensions differ");
    const int n = a.dim;

    double mean_term = 0.0;
    for (int i = 0; i < n; ++i) {
        const double d = a.mean[i] - b.mean[i];
        mean_term += d * d;
    }
    double tr_a = 0.0, tr_b = 0.0;
    for (int i = 0; i < n; ++i) {
        tr_a += a.cov[static_cast<std::size_t>(i) * n + i];
        tr_b += b.cov[static_cast<std::size_t>(i) * n + i];
    }

    const std::vector<double> sa_root = sym_sqrt(a.cov, n);
    const std::vector<double> inner = mat_mul(mat_mul(sa_root, b.cov, n), sa_root, n);
    // inner is symmetric PSD up to rounding; take eigenvalues directly.
    std::vector<double> evals;
    jacobi_eigen(inner, n, evals, nullptr);
    double tr_root = 0.0;
    for (double v : evals) tr_root += std::sqrt(std::max(0.0, v));

    return std::max(0.0, mean_term + tr_a + tr_b - 2.0 * tr_root);
}

std::pair<double, double> knn_precision_recall(const std::vector<FeatureVector>& real,
                                               const std::vector<FeatureVector>& fake, int k) {
    if (static_cast<int>(real.size()) <= k || static_cast<int>(fake.size()) <= k) {
        throw DomainError("knn_precision_recall: both sets must have more than k points");
    }
    auto sq_dist = [](const FeatureVector& a, const FeatureVector& b) {
        double d = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double diff = a[i] - b[i];
            d += diff * diff;
        }
        return d;
    };
    auto radii = [&](const std::vector<FeatureVector>& set) {
        std::vector<double> r(set.size());
        std::vector<double> d;
        for (std::size_t i = 0; i < set.size(); ++i) {
            d.clear();
            for (std::size_t j = 0; j < set.size(); ++j) {
                if (j != i) d.push_back(sq_dist(set[i], set[j]));
            }
            std::nth_element(d.begin(), d.begin() + (k - 1), d.end());
            r[i] = d[k - 1];  // squared radius
        }
        return r;
    };
    auto covered_fraction = [&](const std::vector<FeatureVector>& points,
                                const std::vector<FeatureVector>& manifold,
                                const std::vector<double>& manifold_r2) {
        int covered = 0;
        for (const FeatureVector& p : points) {
            for (std::size_t i = 0; i < manifold.size(); ++i) {
                if (sq_dist(p, manifold[i]) <= manifold_r2[i]) {
                    ++covered;
                    break;
                }
            }
        }
        return static_cast<double>(covered) / static_cast<double>(points.size());
    };

    const std::vector<double> real_r2 = radii(real);
    const std::vector<double> fake_r2 = radii(fake);
    return {covered_fraction(fake, real, real_r2), covered_fraction(real, fake, fake_r2)};
}

double pairwise_diversity_features(const std::vector<FeatureVector>& features) {
    if (features.size() < 2) throw DomainError("pairwise diversity needs at least 2 items");
    double acc = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < features.size(); ++i) {
        for (std::size_t j = i + 1; j < features.size(); ++j) {
            double cos = 0.0;
            for (std::size_t d = 0; d < features[i].size(); ++d) cos += features[i][d] * features[j][d];
            acc += 1.0 - cos;
            ++pairs;
        }
    }
    return acc / static_cast<double>(pairs);
}

double pairwise_diversity(const std::vector<Image>& images, const Embedder& e) {
    std::vector<FeatureVector> feats;
    feats.reserve(images.size());
    for (const Image& img : images) feats.push_back(embed_image(img, e));
    return pairwise_diversity_features(feats);
}

double vendi_score(const std::vector<FeatureVector>& features) {
    const int n = static_cast<int>(features.size());
    if (n < 1) throw DomainError("vendi needs at least 1 feature");
    std::vector<double> gram(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            double cos = 0.0;
            for (std::size_t d = 0; d < features[i].size(); ++d) cos += features[i][d] * features[j][d];
            gram[static_cast<std::size_t>(i) * n + j] = cos / n;
            gram[static_cast<std::size_t>(j) * n + i] = cos / n;
        }
    }
    std::vector<double> evals;
    jacobi_eigen(gram, n, evals, nullptr);
    double sum = 0.0;
    for (double& v : evals) {
        v = std::max(0.0, v);
        sum += v;
    }
    if (sum <= 0.0) return 1.0;
    double entropy = 0.0;
    for (double v : evals) {
        const double p = v / sum;
        if (p > 0.0) entropy -= p * std::log(p);
    }
    return std::exp(entropy);
}

nlohmann::json MetricsReport::to_json() const {
    nlohmann::json j;
    j["n_real"] = n_real;
    j["n_fake"] = n_fake;
    j["k"] = k;
    j["fid_star"] = fid_star;
    j["precision_star"] = precision_star;
    j["recall"] = recall;
    j["lpips_mean"] = lpips_mean;
    j["vendi"] = vendi;
    j["alignment_mean"] = alignment_mean;
    j["blip"] = blip ? nlohmann::json(*blip) : nlohmann::json(nullptr);
    if (ref_fid_star) j["ref_fid_star"] = *ref_fid_star;
    return j;
}

MetricsReport MetricsReport::from_json(const nlohmann::json& j) {
    MetricsReport r;
    r.n_real = j.at("n_real").get<int>();
    r.n_fake = j.at("n_fake").get<int>();
    r.k = j.at("k").get<int>();
    r.fid_star = j.at("fid_star").get<double>();
    r.precision_star = j.at("precision_star").get<double>();
    r.recall = j.at("recall").get<double>();
    r.lpips_mean = j.at("lpips_mean").get<double>();
    r.vendi = j.at("vendi").get<double>();
    r.alignment_mean = j.at("alignment_mean").get<double>();
    if (j.contains("blip") && !j["blip"].is_null()) r.blip = j["blip"].get<double>();
    if (j.contains("ref_fid_star") && !j["ref_fid_star"].is_null()) {
        r.ref_fid_star = j["ref_fid_star"].get<double>();
    }
    return r;
}

std::vector<std::string> MetricsReport::csv_header() {
    return {"n_real", "n_fake",     "k",     "fid_star",      "precision_star",
            "recall", "lpips_mean", "vendi", "alignment_mean"};
}

std::vector<std::string> MetricsReport::csv_cells() const {
    return {std::to_string(n_real), std::to_string(n_fake), std::to_string(k),
            fmt_g6(fid_star),       fmt_g6(precision_star), fmt_g6(recall),
            fmt_g6(lpips_mean),     fmt_g6(vendi),          fmt_g6(alignment_mean)};
}

MetricsReport build_report(const std::vector<Image>& plain, const std::vector<Image>& amplified,
                           const std::vector<Image>& baselines, const Embedder& e, int k,
                           const ScorerBundle& bundle, const ConditioningSpec& cond) {
    if (baselines.size() != amplified.size()) {
        throw DimensionError("build_report: need one baseline per amplified image");
    }
    std::vector<FeatureVector> real_feats, fake_feats;
    real_feats.reserve(plain.size());
    fake_feats.reserve(amplified.size());
    for (const Image& img : plain) real_feats.push_back(embed_image(img, e));
    for (const Image& img : amplified) fake_feats.push_back(embed_image(img, e));

    MetricsReport r;
    r.n_real = static_cast<int>(plain.size());
    r.n_fake = static_cast<int>(amplified.size());
    r.k = k;
    r.fid_star = frechet(GaussianMoments::fit(real_feats), GaussianMoments::fit(fake_feats));
    std::tie(r.precision_star, r.recall) = knn_precision_recall(real_feats, fake_feats, k);
    r.lpips_mean = pairwise_diversity_features(fake_feats);
    r.vendi = vendi_score(fake_feats);

    double align = 0.0;
    for (std::size_t i = 0; i < amplified.size(); ++i) {
        align += bundle.alignment(amplified[i], UsabilityContext{cond, baselines[i]});
    }
    r.alignment_mean = align / static_cast<double>(amplified.size());
    return r;
}

}  // namespace c3
