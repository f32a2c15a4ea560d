#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "c3/denoiser.hpp"
#include "c3/metrics.hpp"
#include "c3/scorer.hpp"
#include "c3/selection.hpp"
#include "json.hpp"

namespace c3 {

struct ScorerConfig {
    ScorerSource source = ScorerSource::LocalProxy;
    std::string endpoint;
    bool fallback_to_proxy = true;
    int timeout_ms = 10000;
    int retries = 2;
};

struct MetricsConfig {
    int k = 3;
    std::uint64_t embed_seed = 101;
};

/// Fully resolved experiment description. Everything that influences outputs
/// lives here, so the canonical JSON of this struct is the reproducibility key.
struct ExperimentConfig {
    ModelConfig model;
    SamplerConfig sampler;  // experiment default cfg_scale is 1.0 (plain conditional pass)
    std::vector<std::string> concepts = {"chair", "teddy bear"};
    std::map<std::string, std::string> ref_concepts;
    std::optional<std::string> modifier = "creative";
    std::optional<std::string> negative_concept;
    int seeds = 8;
    HookSet hooks;
    SearchConfig search;
    std::optional<double> combination_sum;  // absent: 1.0 for 1-step, else 0.6
    std::map<BlockId, double> combination_weights;
    ScorerConfig scorer;
    MetricsConfig metrics;
    std::string out_dir = "out";
    nlohmann::json params = nlohmann::json::object();  // command-specific knobs

    double resolved_target_sum() const;
    CombinationConfig combination() const;
    ConditioningSpec conditioning(const std::string& concept_name) const;
    /// Cutoff per block: the hook profile's value where present, else 0.25.
    std::map<BlockId, double> cutoffs() const;
};

/// Built-in defaults as JSON (the base layer every config file merges onto).
nlohmann::json default_config_json();

/// Deep-merge: object values recurse, everything else is replaced by `over`.
void merge_config(nlohmann::json& base, const nlohmann::json& over);

/// `--preset turbo|lightning4|sdxl`: sets sampler.steps and combination sum.
void apply_preset(nlohmann::json& j, const std::string& name);

/// `--set dotted.path=value`; value parsed as JSON when possible, else string.
void apply_set_override(nlohmann::json& j, const std::string& keyval);

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// FNV-1a digest (hex) of the canonicalized (key-sorted) config JSON.
std::string config_hash(const nlohmann::json& canonical);

ScorerBundle make_bundle(const ScorerConfig& cfg);

nlohmann::json profile_to_json(const AmplificationProfile& profile,
                               const std::map<BlockId, double>& shares, double target_sum);
AmplificationProfile profile_from_json(const nlohmann::json& j);

}  // namespace c3
