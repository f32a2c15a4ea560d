#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "c3/catalyst.hpp"
#include "c3/image.hpp"
#include "c3/tensor.hpp"

namespace c3 {

enum class BlockId { Down0, Down1, Down2, Mid, Up0, Up1, Up2 };

constexpr std::array<BlockId, 7> kAllBlocks = {BlockId::Down0, BlockId::Down1, BlockId::Down2,
                                               BlockId::Mid,   BlockId::Up0,   BlockId::Up1,
                                               BlockId::Up2};
/// Default amplification targets: the down and middle blocks.
constexpr std::array<BlockId, 4> kCatalystBlocks = {BlockId::Down0, BlockId::Down1,
                                                    BlockId::Down2, BlockId::Mid};

const char* to_string(BlockId b);
BlockId block_from_string(const std::string& name);

struct ModelConfig {
    int latent_channels = 4;
    int latent_size = 32;                       // power of two >= 8
    std::array<int, 4> widths = {32, 64, 128, 128};  // Down0, Down1, Down2, Mid
    int cond_dim = 64;
    std::uint64_t weight_seed = 7;  // shipped reference network

    bool operator==(const ModelConfig&) const = default;
};

struct ConditioningSpec {
    std::string concept_name;
    std::optional<std::string> modifier;          // e.g. "creative"
    std::optional<std::string> negative_concept;

    /// Rendered prompt, e.g. "a creative chair".
    std::string prompt_text() const;
};

struct SamplerConfig {
    int steps = 4;            // presets: 1, 4, 25
    double cfg_scale = 0.0;   // 0 = unguided (prediction from the negative/empty branch)
    std::optional<std::array<int, 2>> step_range;  // hook window, inclusive; default all steps
};

using AmplificationProfile = std::map<BlockId, AmplificationSpec>;

enum class HookMode { None, C3, FreeU };

HookMode hook_mode_from_string(const std::string& name);
const char* to_string(HookMode m);

struct HookSet {
    HookMode mode = HookMode::None;
    AmplificationProfile c3_profile;
    FreeUSpec freeu;
    std::optional<std::array<int, 2>> step_range;  // overrides SamplerConfig when set
    bool amplify_skips = true;  // false: skip connections read the pre-hook feature
};

struct Conv2d {
    int in_ch = 0, out_ch = 0, ksize = 3, stride = 1;
    std::vector<float> w;  // out * in * k * k
};

struct Linear {
    int in_dim = 0, out_dim = 0;
    std::vector<float> w;  // out * in
};

struct BlockWeights {
    Conv2d conv;
    Linear time_proj;  // time embedding -> per-channel bias
    Linear cond_proj;  // conditioning vector -> per-channel bias
};

/// Untrained block-structured denoiser: three stride-2 down blocks, a middle
/// block, and three up blocks with skip connections (Down_i feeds Up_{2-i}).
/// All weights are filled deterministically from weight_seed, so the forward
/// pass is a pure function of (weights, latent, step, conditioning, hooks).
struct DenoiserModel {
    ModelConfig cfg;
    std::array<BlockWeights, 7> blocks;  // order of kAllBlocks
    Conv2d head;                         // 1x1 projection back to latent channels
    std::vector<float> decoder;          // 3 x latent_channels pixel map
    float decode_mid = 0.5f;
    float decode_scale = kDecodeScale;

    // Maps typical final-latent magnitudes into a usable pixel range at the
    // calibration midpoint 0.5; chosen once against the reference network.
    static constexpr float kDecodeScale = 0.12f;
};

DenoiserModel build_model(const ModelConfig& cfg);

/// Unit-norm deterministic stand-in for a text embedding: hash-seeded Gaussian
/// for the concept plus 0.5x the modifier's vector when present.
std::vector<float> embed_conditioning(const ConditioningSpec& spec, int cond_dim);

struct StepInfo {
    int index = 0;  // sampling-order index, 0 = first (noisiest) step
    int t = 999;    // virtual schedule timestep in [0, 999]
};

struct ForwardResult {
    FeatureMap eps;
    std::map<BlockId, FeatureMap> captured;  // post-hook block outputs when requested
};

ForwardResult forward(const DenoiserModel& model, const FeatureMap& latent, StepInfo step,
                      const std::vector<float>& cond, const HookSet& hooks, bool capture = false);

/// Guidance blend (1-g)*eps_neg + g*eps_cond; endpoints short-circuit to a
/// single forward pass so g=0 and g=1 are bit-exact.
FeatureMap guided_eps(const DenoiserModel& model, const FeatureMap& latent, StepInfo step,
                      const std::vector<float>& cond_vec, const std::vector<float>& neg_vec,
                      double cfg_scale, const HookSet& hooks);

struct SampleResult {
    Image image;
    FeatureMap final_latent;
};

/// Deterministic DDIM (eta = 0) over an evenly spaced subsequence of the
/// 1000-step linear beta schedule; initial latent from RngStream(seed).
SampleResult sample(const DenoiserModel& model, const SamplerConfig& sampler,
                    const ConditioningSpec& cond, std::uint64_t seed, const HookSet& hooks);

Image decode(const DenoiserModel& model, const FeatureMap& latent);

/// Pre-clamp pixel values (decode without the final [0, 1] clamp).
Image decode_preclamp(const DenoiserModel& model, const FeatureMap& latent);

/// Cumulative alpha-bar of the 1000-step linear beta schedule (1e-4 .. 0.02).
const std::vector<double>& alpha_bar_schedule();

/// Descending virtual timesteps for T sampling steps (trailing spacing).
std::vector<int> ddim_timesteps(int steps);

/// Parameter export/import: one tensor file per parameter plus a JSON
/// manifest naming them.
void export_weights(const DenoiserModel& model, const std::string& dir);
DenoiserModel import_weights(const std::string& dir);

}  // namespace c3
