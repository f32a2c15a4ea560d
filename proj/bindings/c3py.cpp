#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "c3/catalyst.hpp"
#include "c3/config.hpp"
#include "c3/denoiser.hpp"
#include "c3/fft.hpp"
#include "c3/metrics.hpp"
#include "c3/scorer.hpp"
#include "c3/selection.hpp"
#include "c3/tensor.hpp"

namespace py = pybind11;

namespace {

c3::FeatureMap map_from_array(const py::array_t<float, py::array::c_style | py::array::forcecast>& arr) {
    if (arr.ndim() != 3) throw c3::DimensionError("expected a (channels, height, width) array");
    c3::FeatureMap m(static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)),
                     static_cast<int>(arr.shape(2)));
    std::copy(arr.data(), arr.data() + arr.size(), m.data.begin());
    return m;
}

py::array_t<float> array_from_map(const c3::FeatureMap& m) {
    py::array_t<float> arr({m.channels, m.height, m.width});
    std::copy(m.data.begin(), m.data.end(), arr.mutable_data());
    return arr;
}

py::array_t<std::complex<float>> array_from_spectrum(const c3::Spectrum& s) {
    py::array_t<std::complex<float>> arr({s.channels, s.height, s.width});
    std::copy(s.data.begin(), s.data.end(), arr.mutable_data());
    return arr;
}

c3::Spectrum spectrum_from_array(
    const py::array_t<std::complex<float>, py::array::c_style | py::array::forcecast>& arr) {
    if (arr.ndim() != 3) throw c3::DimensionError("expected a (channels, height, width) array");
    c3::Spectrum s(static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)),
                   static_cast<int>(arr.shape(2)));
    std::copy(arr.data(), arr.data() + arr.size(), s.data.begin());
    return s;
}

c3::Image image_from_array(const py::array_t<float, py::array::c_style | py::array::forcecast>& arr) {
    if (arr.ndim() != 3 || arr.shape(0) != 3 || arr.shape(1) != arr.shape(2)) {
        throw c3::DimensionError("expected a (3, size, size) array");
    }
    c3::Image img(static_cast<int>(arr.shape(1)));
    std::copy(arr.data(), arr.data() + arr.size(), img.data.begin());
    return img;
}

py::array_t<float> array_from_image(const c3::Image& img) {
    py::array_t<float> arr({3, img.size, img.size});
    std::copy(img.data.begin(), img.data.end(), arr.mutable_data());
    return arr;
}

std::vector<c3::FeatureVector> features_from_array(
    const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
    if (arr.ndim() != 2) throw c3::DimensionError("expected a (n, dim) array");
    std::vector<c3::FeatureVector> out(arr.shape(0));
    for (py::ssize_t i = 0; i < arr.shape(0); ++i) {
        out[i].assign(arr.data() + i * arr.shape(1), arr.data() + (i + 1) * arr.shape(1));
    }
    return out;
}

c3::ConditioningSpec make_cond(const std::string& concept_name,
                               const std::optional<std::string>& modifier,
                               const std::optional<std::string>& negative) {
    c3::ConditioningSpec spec;
    spec.concept_name = concept_name;
    spec.modifier = modifier;
    spec.negative_concept = negative;
    return spec;
}

c3::HookSet hooks_from_dict(const py::dict& profile, double rho, bool amplify_skips,
                            std::optional<std::pair<int, int>> step_range) {
    c3::HookSet hooks;
    if (profile.empty()) return hooks;
    hooks.mode = c3::HookMode::C3;
    hooks.amplify_skips = amplify_skips;
    if (step_range) hooks.step_range = std::array<int, 2>{step_range->first, step_range->second};
    for (const auto& item : profile) {
        const std::string block = py::cast<std::string>(item.first);
        const double lambda = py::cast<double>(item.second);
        hooks.c3_profile[c3::block_from_string(block)] = c3::AmplificationSpec{lambda, rho};
    }
    return hooks;
}

}  // namespace

PYBIND11_MODULE(c3py, m) {
    m.doc() = "Low-band feature amplification sandbox: FFT utilities, a toy "
              "block-structured denoiser with amplification hooks, factor "
              "selection, and creativity metrics.";

    py::register_exception<c3::Error>(m, "C3Error");

    m.def("fft2", [](const py::array_t<float, py::array::c_style | py::array::forcecast>& x) {
        return array_from_spectrum(c3::fft2(map_from_array(x)));
    }, py::arg("x"), "Per-channel unnormalized 2D DFT of a (c, h, w) array.");

    m.def("ifft2",
          [](const py::array_t<std::complex<float>, py::array::c_style | py::array::forcecast>& f) {
              return array_from_map(c3::ifft2(spectrum_from_array(f)));
          },
          py::arg("f"), "Inverse 2D DFT (1/(h*w) normalization); returns the real part.");

    m.def("spectral_energy",
          [](const py::array_t<std::complex<float>, py::array::c_style | py::array::forcecast>& f) {
              return c3::spectral_energy(spectrum_from_array(f));
          },
          py::arg("f"));

    m.def("build_low_mask", [](int height, int width, double rho) {
        const c3::LowFreqMask mask = c3::build_low_mask(height, width, rho);
        py::array_t<std::uint8_t> arr({height, width});
        std::copy(mask.bits.begin(), mask.bits.end(), arr.mutable_data());
        return arr;
    }, py::arg("height"), py::arg("width"), py::arg("rho"));

    m.def("amplify_low",
          [](const py::array_t<float, py::array::c_style | py::array::forcecast>& x, double lam,
             double rho) {
              return array_from_map(c3::amplify_low(map_from_array(x), {lam, rho}));
          },
          py::arg("x"), py::arg("lam"), py::arg("rho") = 0.25,
          "Scale the low-frequency band by lam, keeping the high band.");

    m.def("amplify_uniform",
          [](const py::array_t<float, py::array::c_style | py::array::forcecast>& x, double lam) {
              return array_from_map(c3::amplify_uniform(map_from_array(x), lam));
          },
          py::arg("x"), py::arg("lam"));

    m.def("high_band_energy",
          [](const py::array_t<float, py::array::c_style | py::array::forcecast>& x, double rho) {
              return c3::high_band_energy(map_from_array(x), rho);
          },
          py::arg("x"), py::arg("rho") = 0.25);

    m.def("freeu_transform",
          [](const py::array_t<float, py::array::c_style | py::array::forcecast>& backbone,
             const py::array_t<float, py::array::c_style | py::array::forcecast>& skip, double b,
             double s, double rho_skip) {
              auto [bb, sk] = c3::freeu_transform(map_from_array(backbone), map_from_array(skip),
                                                  {b, s, rho_skip});
              return py::make_tuple(array_from_map(bb), array_from_map(sk));
          },
          py::arg("backbone"), py::arg("skip"), py::arg("b"), py::arg("s"),
          py::arg("rho_skip") = 0.25);

    m.def("embed_conditioning",
          [](const std::string& concept_name, const std::optional<std::string>& modifier,
             int cond_dim) {
              const auto v =
                  c3::embed_conditioning(make_cond(concept_name, modifier, std::nullopt), cond_dim);
              py::array_t<float> arr(static_cast<py::ssize_t>(v.size()));
              std::copy(v.begin(), v.end(), arr.mutable_data());
              return arr;
          },
          py::arg("concept"), py::arg("modifier") = std::nullopt, py::arg("cond_dim") = 64);

    py::class_<c3::DenoiserModel>(m, "Model")
        .def(py::init([](int latent_channels, int latent_size, std::array<int, 4> widths,
                         int cond_dim, std::uint64_t weight_seed) {
                 c3::ModelConfig cfg;
                 cfg.latent_channels = latent_channels;
                 cfg.latent_size = latent_size;
                 cfg.widths = widths;
                 cfg.cond_dim = cond_dim;
                 cfg.weight_seed = weight_seed;
                 return c3::build_model(cfg);
             }),
             py::arg("latent_channels") = 4, py::arg("latent_size") = 32,
             py::arg("widths") = std::array<int, 4>{32, 64, 128, 128}, py::arg("cond_dim") = 64,
             py::arg("weight_seed") = c3::ModelConfig{}.weight_seed)
        .def("sample",
             [](const c3::DenoiserModel& model, const std::string& concept_name,
                const std::optional<std::string>& modifier,
                const std::optional<std::string>& negative, std::uint64_t seed, int steps,
                double cfg_scale, const py::dict& profile, double rho, bool amplify_skips,
                std::optional<std::pair<int, int>> step_range) {
                 c3::SamplerConfig sampler;
                 sampler.steps = steps;
                 sampler.cfg_scale = cfg_scale;
                 const auto res =
                     c3::sample(model, sampler, make_cond(concept_name, modifier, negative), seed,
                                hooks_from_dict(profile, rho, amplify_skips, step_range));
                 return py::make_tuple(array_from_image(res.image),
                                       array_from_map(res.final_latent));
             },
             py::arg("concept"), py::arg("modifier") = std::nullopt,
             py::arg("negative") = std::nullopt, py::arg("seed") = 0, py::arg("steps") = 4,
             py::arg("cfg_scale") = 1.0, py::arg("profile") = py::dict(), py::arg("rho") = 0.25,
             py::arg("amplify_skips") = true, py::arg("step_range") = std::nullopt,
             "Deterministic DDIM sample; returns (image, final_latent). The "
             "profile maps block names (Down0..Up2) to amplification factors.")
        .def("decode",
             [](const c3::DenoiserModel& model,
                const py::array_t<float, py::array::c_style | py::array::forcecast>& latent) {
                 return array_from_image(c3::decode(model, map_from_array(latent)));
             },
             py::arg("latent"))
        .def_property_readonly("latent_size",
                               [](const c3::DenoiserModel& m_) { return m_.cfg.latent_size; });

    m.def("aesthetic_proxy",
          [](const py::array_t<float, py::array::c_style | py::array::forcecast>& img) {
              return c3::aesthetic_proxy(image_from_array(img));
          },
          py::arg("image"));

    m.def("alignment_proxy",
          [](const py::array_t<float, py::array::c_style | py::array::forcecast>& img,
             const py::array_t<float, py::array::c_style | py::array::forcecast>& baseline) {
              c3::UsabilityContext ctx;
              ctx.baseline_image = image_from_array(baseline);
              return c3::alignment_proxy(image_from_array(img), ctx);
          },
          py::arg("image"), py::arg("baseline"));

    m.def("usability",
          [](const py::array_t<float, py::array::c_style | py::array::forcecast>& img,
             const py::array_t<float, py::array::c_style | py::array::forcecast>& baseline) {
              c3::UsabilityContext ctx;
              ctx.baseline_image = image_from_array(baseline);
              const c3::ScorerBundle bundle = c3::make_local_bundle();
              return c3::usability(image_from_array(img), ctx, bundle);
          },
          py::arg("image"), py::arg("baseline"));

    m.def("combine",
          [](const py::dict& lambda_stars, double target_sum, double rho) {
              std::vector<c3::BlockSelection> sels;
              std::map<c3::BlockId, double> cutoffs;
              for (const auto& item : lambda_stars) {
                  c3::BlockSelection sel;
                  sel.block = c3::block_from_string(py::cast<std::string>(item.first));
                  sel.lambda_star = py::cast<double>(item.second);
                  sels.push_back(sel);
                  cutoffs[sel.block] = rho;
              }
              c3::CombinationConfig cc;
              cc.target_sum = target_sum;
              py::dict out;
              for (const auto& [block, spec] : c3::combine(sels, cc, cutoffs)) {
                  out[c3::to_string(block)] = spec.lambda;
              }
              return out;
          },
          py::arg("lambda_stars"), py::arg("target_sum"), py::arg("rho") = 0.25,
          "Budgeted multi-block combination: lambda = 1 + s * (lambda* - 1).");

    m.def("embed_image",
          [](const py::array_t<float, py::array::c_style | py::array::forcecast>& img,
             std::uint64_t embed_seed) {
              static std::map<std::uint64_t, c3::Embedder> cache;
              auto it = cache.find(embed_seed);
              if (it == cache.end()) it = cache.emplace(embed_seed, c3::Embedder::build(embed_seed)).first;
              const auto v = c3::embed_image(image_from_array(img), it->second);
              py::array_t<double> arr(static_cast<py::ssize_t>(v.size()));
              std::copy(v.begin(), v.end(), arr.mutable_data());
              return arr;
          },
          py::arg("image"), py::arg("embed_seed") = 101);

    m.def("frechet",
          [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
             const py::array_t<double, py::array::c_style | py::array::forcecast>& b) {
              return c3::frechet(c3::GaussianMoments::fit(features_from_array(a)),
                                 c3::GaussianMoments::fit(features_from_array(b)));
          },
          py::arg("features_a"), py::arg("features_b"),
          "Frechet distance between Gaussian fits of two (n, dim) feature sets.");

    m.def("knn_precision_recall",
          [](const py::array_t<double, py::array::c_style | py::array::forcecast>& real,
             const py::array_t<double, py::array::c_style | py::array::forcecast>& fake, int k) {
              return c3::knn_precision_recall(features_from_array(real), features_from_array(fake),
                                              k);
          },
          py::arg("real"), py::arg("fake"), py::arg("k") = 3);

    m.def("vendi_score",
          [](const py::array_t<double, py::array::c_style | py::array::forcecast>& features) {
              return c3::vendi_score(features_from_array(features));
          },
          py::arg("features"));

    m.def("pairwise_diversity",
          [](const py::array_t<double, py::array::c_style | py::array::forcecast>& features) {
              return c3::pairwise_diversity_features(features_from_array(features));
          },
          py::arg("features"));

    m.def("save_tensor",
          [](const std::string& path,
             const py::array_t<float, py::array::c_style | py::array::forcecast>& x) {
              c3::save_tensor(path, map_from_array(x));
          },
          py::arg("path"), py::arg("x"));

    m.def("load_tensor", [](const std::string& path) {
        return array_from_map(c3::load_tensor(path));
    }, py::arg("path"));
}
