#include "c3/denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "c3/rng.hpp"
#include "json.hpp"

namespace c3 {

namespace {

constexpr int kTimeDim = 64;
constexpr std::uint64_t kCondSeedBase = 0x632d636f6e6365ULL;  // conditioning hash namespace

// Parameter stream ids: 3 per block (conv, time_proj, cond_proj), then head
// and decoder. The enumeration order is part of the weight format.
constexpr std::uint64_t kHeadStream = 21;
constexpr std::uint64_t kDecoderStream = 22;

void fill_gaussian(std::vector<float>& w, RngStream& rng, double stddev) {
    for (float& v : w) v = static_cast<float>(rng.normal() * stddev);
}

Conv2d make_conv(int in_ch, int out_ch, int ksize, int stride, RngStream rng) {
    Conv2d c;
    c.in_ch = in_ch;
    c.out_ch = out_ch;
    c.ksize = ksize;
    c.stride = stride;
    c.w.resize(static_cast<std::size_t>(out_ch) * in_ch * ksize * ksize);
    fill_gaussian(c.w, rng, std::sqrt(2.0 / (in_ch * ksize * ksize)));
    return c;
}

Linear make_linear(int in_dim, int out_dim, RngStream rng, double stddev) {
    Linear l;
    l.in_dim = in_dim;
    l.out_dim = out_dim;
    l.w.resize(static_cast<std::size_t>(out_dim) * in_dim);
    fill_gaussian(l.w, rng, stddev);
    return l;
}

// ksize 3 (pad 1) or 1 (pad 0); optional per-channel bias and tanh.
FeatureMap conv_forward(const Conv2d& conv, const FeatureMap& in, const float* bias,
                        bool apply_tanh) {
    const int oh = in.height / conv.stride;
    const int ow = in.width / conv.stride;
    FeatureMap out(conv.out_ch, oh, ow);
    const int pad = conv.ksize / 2;
    for (int o = 0; o < conv.out_ch; ++o) {
        const float b = bias ? bias[o] : 0.0f;
        for (int y = 0; y < oh; ++y) {
            for (int x = 0; x < ow; ++x) {
                float acc = b;
                for (int i = 0; i < conv.in_ch; ++i) {
                    const float* wk = conv.w.data() +
                                      ((static_cast<std::size_t>(o) * conv.in_ch + i) *
                                       conv.ksize * conv.ksize);
                    for (int ky = 0; ky < conv.ksize; ++ky) {
                        const int sy = y * conv.stride + ky - pad;
                        if (sy < 0 || sy >= in.height) continue;
                        for (int kx = 0; kx < conv.ksize; ++kx) {
                            const int sx = x * conv.stride + kx - pad;
                            if (sx < 0 || sx >= in.width) continue;
                            acc += wk[ky * conv.ksize + kx] * in.at(i, sy, sx);
                        }
                    }
                }
                out.at(o, y, x) = apply_tanh ? std::tanh(acc) : acc;
            }
        }
    }
    return out;
}

std::vector<float> time_embedding(int t) {
    std::vector<float> emb(kTimeDim);
    const int half = kTimeDim / 2;
    for (int i = 0; i < half; ++i) {
        const double freq = std::exp(-std::log(10000.0) * i / half);
        emb[i] = static_cast<float>(std::sin(t * freq));
        emb[half + i] = static_cast<float>(std::cos(t * freq));
    }
    double norm = 0.0;
    for (float v : emb) norm += static_cast<double>(v) * v;
    norm = std::sqrt(norm);
    if (norm > 0.0) {
        for (float& v : emb) v = static_cast<float>(v / norm);
    }
    return emb;
}

std::vector<float> block_bias(const BlockWeights& bw, const std::vector<float>& temb,
                              const std::vector<float>& cond) {
    std::vector<float> bias(bw.conv.out_ch, 0.0f);
    for (int o = 0; o < bw.time_proj.out_dim; ++o) {
        float acc = 0.0f;
        const float* row = bw.time_proj.w.data() + static_cast<std::size_t>(o) * bw.time_proj.in_dim;
        for (int d = 0; d < bw.time_proj.in_dim; ++d) acc += row[d] * temb[d];
        bias[o] += acc;
    }
    for (int o = 0; o < bw.cond_proj.out_dim; ++o) {
        float acc = 0.0f;
        const float* row = bw.cond_proj.w.data() + static_cast<std::size_t>(o) * bw.cond_proj.in_dim;
        for (int d = 0; d < bw.cond_proj.in_dim; ++d) acc += row[d] * cond[d];
        bias[o] += acc;
    }
    return bias;
}

FeatureMap upsample2(const FeatureMap& in) {
    FeatureMap out(in.channels, in.height * 2, in.width * 2);
    for (int c = 0; c < in.channels; ++c) {
        for (int y = 0; y < out.height; ++y) {
            for (int x = 0; x < out.width; ++x) {
                out.at(c, y, x) = in.at(c, y / 2, x / 2);
            }
        }
    }
    return out;
}

FeatureMap concat_channels(const FeatureMap& a, const FeatureMap& b) {
    if (a.height != b.height || a.width != b.width) {
        throw DimensionError("concat: spatial dims differ");
    }
    FeatureMap out(a.channels + b.channels, a.height, a.width);
    std::memcpy(out.data.data(), a.data.data(), a.data.size() * sizeof(float));
    std::memcpy(out.data.data() + a.data.size(), b.data.data(), b.data.size() * sizeof(float));
    return out;
}

std::vector<float> gaussian_from_string(const std::string& s, int dim) {
    RngStream rng(kCondSeedBase ^ fnv1a64(s), 0);
    std::vector<float> v(dim);
    for (float& x : v) x = rng.normal_f();
    return v;
}

}  // namespace

const char* to_string(BlockId b) {
    switch (b) {
        case BlockId::Down0: return "Down0";
        case BlockId::Down1: return "Down1";
        case BlockId::Down2: return "Down2";
        case BlockId::Mid: return "Mid";
        case BlockId::Up0: return "Up0";
        case BlockId::Up1: return "Up1";
        case BlockId::Up2: return "Up2";
    }
    return "?";
}

BlockId block_from_string(const std::string& name) {
    for (BlockId b : kAllBlocks) {
        if (name == to_string(b)) return b;
    }
    throw ConfigError("unknown block id: " + name);
}

const char* to_string(HookMode m) {
    switch (m) {
        case HookMode::None: return "None";
        case HookMode::C3: return "C3";
        case HookMode::FreeU: return "FreeU";
    }
    return "?";
}

HookMode hook_mode_from_string(const std::string& name) {
    if (name == "None" || name == "none") return HookMode::None;
    if (name == "C3" || name == "c3") return HookMode::C3;
    if (name == "FreeU" || name == "freeu") return HookMode::FreeU;
    throw ConfigError("unknown hook mode: " + name);
}

std::string ConditioningSpec::prompt_text() const {
    std::string s = "a ";
    if (modifier) s += *modifier + " ";
    s += concept_name;
    return s;
}

DenoiserModel build_model(const ModelConfig& cfg) {
    if (cfg.latent_size < 8 || !is_pow2(cfg.latent_size)) {
        throw DimensionError("latent_size must be a power of two >= 8");
    }
    if (cfg.latent_channels < 1 || cfg.cond_dim < 1) {
        throw DimensionError("latent_channels and cond_dim must be positive");
    }
    for (int w : cfg.widths) {
        if (w < 1) throw DimensionError("block widths must be positive");
    }

    DenoiserModel m;
    m.cfg = cfg;
    const auto& wd = cfg.widths;

    // (in, out, ksize, stride) per block; up blocks consume backbone + skip.
    const int down_in[4] = {cfg.latent_channels, wd[0], wd[1], wd[2]};
    const int down_out[4] = {wd[0], wd[1], wd[2], wd[3]};
    const int up_in[3] = {wd[3] + wd[2], wd[1] + wd[1], wd[0] + wd[0]};
    const int up_out[3] = {wd[1], wd[0], wd[0]};

    const double proj_std = std::sqrt(0.5);
    for (int i = 0; i < 7; ++i) {
        const std::uint64_t base = static_cast<std::uint64_t>(3 * i);
        int in_ch, out_ch, stride;
        if (i < 3) {
            in_ch = down_in[i];
            out_ch = down_out[i];
            stride = 2;
        } else if (i == 3) {
            in_ch = down_in[3];
            out_ch = down_out[3];
            stride = 1;
        } else {
            in_ch = up_in[i - 4];
            out_ch = up_out[i - 4];
            stride = 1;
        }
        m.blocks[i].conv = make_conv(in_ch, out_ch, 3, stride, RngStream(cfg.weight_seed, base));
        m.blocks[i].time_proj =
            make_linear(kTimeDim, out_ch, RngStream(cfg.weight_seed, base + 1), proj_std);
        m.blocks[i].cond_proj =
            make_linear(cfg.cond_dim, out_ch, RngStream(cfg.weight_seed, base + 2), proj_std);
    }
    m.head = make_conv(wd[0], cfg.latent_channels, 1, 1, RngStream(cfg.weight_seed, kHeadStream));

    m.decoder.resize(static_cast<std::size_t>(3) * cfg.latent_channels);
    RngStream dec_rng(cfg.weight_seed, kDecoderStream);
    fill_gaussian(m.decoder, dec_rng, std::sqrt(1.0 / cfg.latent_channels));
    return m;
}

std::vector<float> embed_conditioning(const ConditioningSpec& spec, int cond_dim) {
    if (spec.concept_name.empty()) throw DomainError("conditioning concept must be nonempty");
    std::vector<float> v = gaussian_from_string(spec.concept_name, cond_dim);
    if (spec.modifier) {
        const std::vector<float> mod = gaussian_from_string(*spec.modifier, cond_dim);
        for (int i = 0; i < cond_dim; ++i) v[i] += 0.5f * mod[i];
    }
    double norm = 0.0;
    for (float x : v) norm += static_cast<double>(x) * x;
    norm = std::sqrt(norm);
    for (float& x : v) x = static_cast<float>(x / norm);
    return v;
}

ForwardResult forward(const DenoiserModel& model, const FeatureMap& latent, StepInfo step,
                      const std::vector<float>& cond, const HookSet& hooks, bool capture) {
    const ModelConfig& cfg = model.cfg;
    if (latent.channels != cfg.latent_channels || latent.height != cfg.latent_size ||
        latent.width != cfg.latent_size) {
        throw DimensionError("forward: latent shape does not match the model config");
    }
    if (static_cast<int>(cond.size()) != cfg.cond_dim) {
        throw DimensionError("forward: conditioning vector has wrong dimension");
    }

    const bool in_range = !hooks.step_range ||
                          (step.index >= (*hooks.step_range)[0] &&
                           step.index <= (*hooks.step_range)[1]);
    auto c3_spec = [&](BlockId b) -> const AmplificationSpec* {
        if (hooks.mode != HookMode::C3 || !in_range) return nullptr;
        auto it = hooks.c3_profile.find(b);
        return it == hooks.c3_profile.end() ? nullptr : &it->second;
    };
    const bool freeu_active = hooks.mode == HookMode::FreeU && in_range;

    const std::vector<float> temb = time_embedding(step.t);
    ForwardResult res;

    // Down-path blocks saturate (tanh); the up path stays linear so feature
    // changes survive to the prediction instead of being squashed.
    auto run_block = [&](int bi, const FeatureMap& in) {
        const BlockWeights& bw = model.blocks[bi];
        const std::vector<float> bias = block_bias(bw, temb, cond);
        return conv_forward(bw.conv, in, bias.data(), /*apply_tanh=*/bi < 4);
    };

    // Down path + middle. Skips record the tensor the mirrored up block reads.
    FeatureMap x = latent;
    std::array<FeatureMap, 3> skips;
    for (int i = 0; i < 4; ++i) {
        const BlockId id = kAllBlocks[i];
        FeatureMap raw = run_block(i, x);
        FeatureMap* out = &raw;
        FeatureMap hooked;
        if (const AmplificationSpec* spec = c3_spec(id)) {
            hooked = amplify_low(raw, *spec);
            out = &hooked;
        }
        if (i < 3) skips[i] = hooks.amplify_skips ? *out : raw;
        if (capture) res.captured.emplace(id, *out);
        x = std::move(*out);
    }

    // Up path: concat(backbone, skip) -> conv -> hook -> upsample.
    for (int j = 0; j < 3; ++j) {
        const BlockId id = kAllBlocks[4 + j];
        FeatureMap backbone = std::move(x);
        FeatureMap skip = skips[2 - j];
        if (freeu_active) {
            auto [b2, s2] = freeu_transform(backbone, skip, hooks.freeu);
            backbone = std::move(b2);
            skip = std::move(s2);
        }
        FeatureMap merged = concat_channels(backbone, skip);
        FeatureMap raw = run_block(4 + j, merged);
        FeatureMap* out = &raw;
        FeatureMap hooked;
        if (const AmplificationSpec* spec = c3_spec(id)) {
            hooked = amplify_low(raw, *spec);
            out = &hooked;
        }
        if (capture) res.captured.emplace(id, *out);
        x = upsample2(*out);
    }

    // Residual head: the prediction is the input latent plus a learned-shape
    // correction, which keeps DDIM trajectories dominated by network structure
    // rather than by the carried input noise.
    FeatureMap eps = conv_forward(model.head, x, nullptr, /*apply_tanh=*/false);
    for (std::size_t i = 0; i < eps.data.size(); ++i) eps.data[i] += latent.data[i];
    res.eps = std::move(eps);
    return res;
}

FeatureMap guided_eps(const DenoiserModel& model, const FeatureMap& latent, StepInfo step,
                      const std::vector<float>& cond_vec, const std::vector<float>& neg_vec,
                      double cfg_scale, const HookSet& hooks) {
    if (cfg_scale == 0.0) {
        return forward(model, latent, step, neg_vec, hooks).eps;
    }
    if (cfg_scale == 1.0) {
        return forward(model, latent, step, cond_vec, hooks).eps;
    }
    FeatureMap eps_cond = forward(model, latent, step, cond_vec, hooks).eps;
    const FeatureMap eps_neg = forward(model, latent, step, neg_vec, hooks).eps;
    const float g = static_cast<float>(cfg_scale);
    for (std::size_t i = 0; i < eps_cond.data.size(); ++i) {
        eps_cond.data[i] = (1.0f - g) * eps_neg.data[i] + g * eps_cond.data[i];
    }
    return eps_cond;
}

const std::vector<double>& alpha_bar_schedule() {
    static const std::vector<double> abar = [] {
        std::vector<double> v(1000);
        double prod = 1.0;
        for (int i = 0; i < 1000; ++i) {
            const double beta = 1e-4 + (0.02 - 1e-4) * i / 999.0;
            prod *= 1.0 - beta;
            v[i] = prod;
        }
        return v;
    }();
    return abar;
}

std::vector<int> ddim_timesteps(int steps) {
    if (steps < 1 || steps > 1000) {
        throw DomainError("steps must lie in [1, 1000], got " + std::to_string(steps));
    }
    std::vector<int> ts(steps);
    for (int s = 0; s < steps; ++s) {
        ts[s] = 999 - static_cast<int>(std::llround(1000.0 * s / steps));
        if (ts[s] < 0) ts[s] = 0;
    }
    return ts;
}

SampleResult sample(const DenoiserModel& model, const SamplerConfig& sampler,
                    const ConditioningSpec& cond, std::uint64_t seed, const HookSet& hooks) {
    const int T = sampler.steps;
    const std::vector<int> ts = ddim_timesteps(T);

    HookSet resolved = hooks;
    if (!resolved.step_range) resolved.step_range = sampler.step_range;
    if (!resolved.step_range) resolved.step_range = std::array<int, 2>{0, T - 1};
    if ((*resolved.step_range)[0] < 0 || (*resolved.step_range)[1] > T - 1 ||
        (*resolved.step_range)[0] > (*resolved.step_range)[1]) {
        throw DomainError("step_range must satisfy 0 <= start <= end <= steps - 1");
    }
    if (!(sampler.cfg_scale >= 0.0) || !std::isfinite(sampler.cfg_scale)) {
        throw DomainError("cfg_scale must be finite and >= 0");
    }

    const std::vector<float> cond_vec = embed_conditioning(cond, model.cfg.cond_dim);
    std::vector<float> neg_vec(model.cfg.cond_dim, 0.0f);
    if (cond.negative_concept) {
        ConditioningSpec neg;
        neg.concept_name = *cond.negative_concept;
        neg_vec = embed_conditioning(neg, model.cfg.cond_dim);
    }

    RngStream rng(seed, 0);
    FeatureMap x(model.cfg.latent_channels, model.cfg.latent_size, model.cfg.latent_size);
    for (float& v : x.data) v = rng.normal_f();

    const std::vector<double>& abar = alpha_bar_schedule();
    for (int s = 0; s < T; ++s) {
        const double a_t = abar[ts[s]];
        const double a_prev = (s + 1 < T) ? abar[ts[s + 1]] : 1.0;
        const FeatureMap eps =
            guided_eps(model, x, StepInfo{s, ts[s]}, cond_vec, neg_vec, sampler.cfg_scale,
                       resolved);
        const double sq_at = std::sqrt(a_t);
        const double sq_1mat = std::sqrt(1.0 - a_t);
        const double sq_ap = std::sqrt(a_prev);
        const double sq_1map = std::sqrt(1.0 - a_prev);
        for (std::size_t i = 0; i < x.data.size(); ++i) {
            const double x0 = (x.data[i] - sq_1mat * eps.data[i]) / sq_at;
            x.data[i] = static_cast<float>(sq_ap * x0 + sq_1map * eps.data[i]);
        }
    }
    SampleResult out;
    out.image = decode(model, x);
    out.final_latent = std::move(x);
    return out;
}

Image decode_preclamp(const DenoiserModel& model, const FeatureMap& latent) {
    const int n = model.cfg.latent_size;
    const int ch = model.cfg.latent_channels;
    if (latent.channels != ch || latent.height != n || latent.width != n) {
        throw DimensionError("decode: latent shape does not match the model config");
    }
    Image img(n);
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            for (int o = 0; o < 3; ++o) {
                float acc = 0.0f;
                for (int c = 0; c < ch; ++c) {
                    acc += model.decoder[static_cast<std::size_t>(o) * ch + c] * latent.at(c, y, x);
                }
                img.at(o, y, x) = model.decode_mid + model.decode_scale * acc;
            }
        }
    }
    return img;
}

Image decode(const DenoiserModel& model, const FeatureMap& latent) {
    Image img = decode_preclamp(model, latent);
    for (float& v : img.data) v = std::clamp(v, 0.0f, 1.0f);
    return img;
}

void export_weights(const DenoiserModel& model, const std::string& dir) {
    nlohmann::json manifest;
    manifest["model_config"] = {{"latent_channels", model.cfg.latent_channels},
                                {"latent_size", model.cfg.latent_size},
                                {"widths", model.cfg.widths},
                                {"cond_dim", model.cfg.cond_dim},
                                {"weight_seed", model.cfg.weight_seed}};
    nlohmann::json tensors = nlohmann::json::object();

    auto dump_conv = [&](const std::string& name, const Conv2d& c) {
        const std::string file = name + ".c3tf";
        save_tensor_file(dir + "/" + file,
                         {static_cast<std::uint32_t>(c.out_ch), static_cast<std::uint32_t>(c.in_ch),
                          static_cast<std::uint32_t>(c.ksize), static_cast<std::uint32_t>(c.ksize)},
                         c.w.data());
        tensors[name] = file;
    };
    auto dump_linear = [&](const std::string& name, const Linear& l) {
        const std::string file = name + ".c3tf";
        save_tensor_file(dir + "/" + file,
                         {static_cast<std::uint32_t>(l.out_dim), static_cast<std::uint32_t>(l.in_dim)},
                         l.w.data());
        tensors[name] = file;
    };

    for (int i = 0; i < 7; ++i) {
        const std::string prefix = std::string("block_") + to_string(kAllBlocks[i]);
        dump_conv(prefix + "_conv", model.blocks[i].conv);
        dump_linear(prefix + "_time", model.blocks[i].time_proj);
        dump_linear(prefix + "_cond", model.blocks[i].cond_proj);
    }
    dump_conv("head", model.head);
    save_tensor_file(dir + "/decoder.c3tf",
                     {3, static_cast<std::uint32_t>(model.cfg.latent_channels)},
                     model.decoder.data());
    tensors["decoder"] = "decoder.c3tf";
    manifest["tensors"] = tensors;

    std::ofstream f(dir + "/weights.json", std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + dir + "/weights.json");
    f << manifest.dump(2) << "\n";
}

DenoiserModel import_weights(const std::string& dir) {
    std::ifstream f(dir + "/weights.json", std::ios::binary);
    if (!f) throw IoError("cannot open for reading: " + dir + "/weights.json");
    nlohmann::json manifest = nlohmann::json::parse(f);

    ModelConfig cfg;
    const auto& mc = manifest.at("model_config");
    cfg.latent_channels = mc.at("latent_channels").get<int>();
    cfg.latent_size = mc.at("latent_size").get<int>();
    cfg.widths = mc.at("widths").get<std::array<int, 4>>();
    cfg.cond_dim = mc.at("cond_dim").get<int>();
    cfg.weight_seed = mc.at("weight_seed").get<std::uint64_t>();

    DenoiserModel model = build_model(cfg);
    const auto& tensors = manifest.at("tensors");

    auto load_conv = [&](const std::string& name, Conv2d& c) {
        RawTensor t = load_tensor_file(dir + "/" + tensors.at(name).get<std::string>());
        if (t.data.size() != c.w.size()) throw FormatError("weight tensor size mismatch: " + name);
        c.w = std::move(t.data);
    };
    auto load_linear = [&](const std::string& name, Linear& l) {
        RawTensor t = load_tensor_file(dir + "/" + tensors.at(name).get<std::string>());
        if (t.data.size() != l.w.size()) throw FormatError("weight tensor size mismatch: " + name);
        l.w = std::move(t.data);
    };

    for (int i = 0; i < 7; ++i) {
        const std::string prefix = std::string("block_") + to_string(kAllBlocks[i]);
        load_conv(prefix + "_conv", model.blocks[i].conv);
        load_linear(prefix + "_time", model.blocks[i].time_proj);
        load_linear(prefix + "_cond", model.blocks[i].cond_proj);
    }
    load_conv("head", model.head);
    RawTensor dec = load_tensor_file(dir + "/" + tensors.at("decoder").get<std::string>());
    if (dec.data.size() != model.decoder.size()) throw FormatError("decoder tensor size mismatch");
    model.decoder = std::move(dec.data);
    return model;
}

}  // namespace c3
