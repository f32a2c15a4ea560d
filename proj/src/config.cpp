#include "c3/config.hpp"

#include <cstdio>

#include "c3/rng.hpp"

namespace c3 {

double ExperimentConfig::resolved_target_sum() const {
    if (combination_sum) return *combination_sum;
    return sampler.steps == 1 ? 1.0 : 0.6;
}

CombinationConfig ExperimentConfig::combination() const {
    CombinationConfig cc;
    cc.target_sum = resolved_target_sum();
    cc.weights = combination_weights;
    return cc;
}

ConditioningSpec ExperimentConfig::conditioning(const std::string& concept_name) const {
    ConditioningSpec spec;
    spec.concept_name = concept_name;
    spec.modifier = modifier;
    spec.negative_concept = negative_concept;
    return spec;
}

std::map<BlockId, double> ExperimentConfig::cutoffs() const {
    std::map<BlockId, double> out;
    for (BlockId b : kAllBlocks) {
        auto it = hooks.c3_profile.find(b);
        out[b] = (it == hooks.c3_profile.end()) ? 0.25 : it->second.rho;
    }
    return out;
}

nlohmann::json default_config_json() {
    nlohmann::json j;
    j["model"] = {{"latent_channels", 4}, {"latent_size", 32},       {"widths", {32, 64, 128, 128}},
                  {"cond_dim", 64},       {"weight_seed", ModelConfig{}.weight_seed}};
    j["sampler"] = {{"steps", 4}, {"cfg_scale", 1.0}, {"step_range", nullptr}};
    j["concepts"] = {"chair", "teddy bear"};
    j["ref_concepts"] = nlohmann::json::object();
    j["modifier"] = "creative";
    j["negative_concept"] = nullptr;
    j["seeds"] = 8;

    // Default profile: the grid caps scaled through the budget rule at the
    // 4-step default sum of 0.6 over four blocks (share 0.15 each).
    nlohmann::json profile;
    const double share = 0.6 / 4.0;
    profile["Down0"] = {{"lambda", 1.0 + share * (2.0 - 1.0)}, {"rho", 0.25}};
    profile["Down1"] = {{"lambda", 1.0 + share * (2.0 - 1.0)}, {"rho", 0.25}};
    profile["Down2"] = {{"lambda", 1.0 + share * (10.0 - 1.0)}, {"rho", 0.25}};
    profile["Mid"] = {{"lambda", 1.0 + share * (10.0 - 1.0)}, {"rho", 0.25}};
    j["hooks"] = {{"mode", "C3"},
                  {"amplify_skips", true},
                  {"step_range", nullptr},
                  {"c3_profile", profile},
                  {"freeu", {{"b", 1.0}, {"s", 1.0}, {"rho_skip", 0.25}}}};

    j["search"] = {{"epsilon", 0.85},
                   {"seeds_per_point", 4},
                   {"full_trace", false},
                   {"grids",
                    {{"Down0", {{"cap", 2.0}, {"points", 5}}},
                     {"Down1", {{"cap", 2.0}, {"points", 5}}},
                     {"Down2", {{"cap", 10.0}, {"points", 10}}},
                     {"Mid", {{"cap", 10.0}, {"points", 10}}}}}};
    j["combination"] = {{"target_sum", nullptr}, {"weights", nlohmann::json::object()}};
    j["scorer"] = {{"source", "local"},
                   {"endpoint", ""},
                   {"fallback_to_proxy", true},
                   {"timeout_ms", 10000},
                   {"retries", 2}};
    j["metrics"] = {{"k", 3}, {"embed_seed", 101}};
    j["out_dir"] = "out";
    j["params"] = nlohmann::json::object();
    return j;
}

void merge_config(nlohmann::json& base, const nlohmann::json& over) {
    if (!over.is_object() || !base.is_object()) {
        base = over;
        return;
    }
    for (auto it = over.begin(); it != over.end(); ++it) {
        if (base.contains(it.key()) && base[it.key()].is_object() && it.value().is_object()) {
            merge_config(base[it.key()], it.value());
        } else {
            base[it.key()] = it.value();
        }
    }
}

void apply_preset(nlohmann::json& j, const std::string& name) {
    if (name == "turbo") {
        j["sampler"]["steps"] = 1;
        j["combination"]["target_sum"] = 1.0;
    } else if (name == "lightning4") {
        j["sampler"]["steps"] = 4;
        j["combination"]["target_sum"] = 0.6;
    } else if (name == "sdxl") {
        j["sampler"]["steps"] = 25;
        j["combination"]["target_sum"] = 0.6;
    } else {
        throw ConfigError("unknown preset: " + name + " (expected turbo|lightning4|sdxl)");
    }
}

void apply_set_override(nlohmann::json& j, const std::string& keyval) {
    const auto eq = keyval.find('=');
    if (eq == std::string::npos) {
        throw ConfigError("--set expects key=value, got: " + keyval);
    }
    const std::string path = keyval.substr(0, eq);
    const std::string raw = keyval.substr(eq + 1);

    nlohmann::json value = nlohmann::json::parse(raw, nullptr, /*allow_exceptions=*/false);
    if (value.is_discarded()) value = raw;  // plain string

    nlohmann::json* node = &j;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot - start);
        if (key.empty()) throw ConfigError("empty key segment in --set path: " + path);
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        node = &(*node)[key];
        start = dot + 1;
    }
}

namespace {

template <typename T>
T get_or_throw(const nlohmann::json& j, const std::string& key) {
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config field '" + key + "': " + e.what());
    }
}

std::optional<std::array<int, 2>> parse_step_range(const nlohmann::json& j) {
    if (j.is_null()) return std::nullopt;
    if (!j.is_array() || j.size() != 2) {
        throw ConfigError("step_range must be null or [start, end]");
    }
    return std::array<int, 2>{j[0].get<int>(), j[1].get<int>()};
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    try {
        const auto& jm = j.at("model");
        cfg.model.latent_channels = get_or_throw<int>(jm, "latent_channels");
        cfg.model.latent_size = get_or_throw<int>(jm, "latent_size");
        cfg.model.widths = get_or_throw<std::array<int, 4>>(jm, "widths");
        cfg.model.cond_dim = get_or_throw<int>(jm, "cond_dim");
        cfg.model.weight_seed = get_or_throw<std::uint64_t>(jm, "weight_seed");

        const auto& js = j.at("sampler");
        cfg.sampler.steps = get_or_throw<int>(js, "steps");
        cfg.sampler.cfg_scale = get_or_throw<double>(js, "cfg_scale");
        cfg.sampler.step_range = parse_step_range(js.at("step_range"));

        cfg.concepts = get_or_throw<std::vector<std::string>>(j, "concepts");
        if (cfg.concepts.empty()) throw ConfigError("concepts must be nonempty");
        cfg.ref_concepts =
            get_or_throw<std::map<std::string, std::string>>(j, "ref_concepts");
        cfg.modifier = j.at("modifier").is_null()
                           ? std::nullopt
                           : std::optional<std::string>(j.at("modifier").get<std::string>());
        cfg.negative_concept =
            j.at("negative_concept").is_null()
                ? std::nullopt
                : std::optional<std::string>(j.at("negative_concept").get<std::string>());
        cfg.seeds = get_or_throw<int>(j, "seeds");
        if (cfg.seeds < 1) throw ConfigError("seeds must be >= 1");

        const auto& jh = j.at("hooks");
        cfg.hooks.mode = hook_mode_from_string(get_or_throw<std::string>(jh, "mode"));
        cfg.hooks.amplify_skips = get_or_throw<bool>(jh, "amplify_skips");
        cfg.hooks.step_range = parse_step_range(jh.at("step_range"));
        for (auto it = jh.at("c3_profile").begin(); it != jh.at("c3_profile").end(); ++it) {
            AmplificationSpec spec;
            spec.lambda = get_or_throw<double>(it.value(), "lambda");
            spec.rho = get_or_throw<double>(it.value(), "rho");
            cfg.hooks.c3_profile[block_from_string(it.key())] = spec;
        }
        const auto& jf = jh.at("freeu");
        cfg.hooks.freeu.b = get_or_throw<double>(jf, "b");
        cfg.hooks.freeu.s = get_or_throw<double>(jf, "s");
        cfg.hooks.freeu.rho_skip = get_or_throw<double>(jf, "rho_skip");

        const auto& jq = j.at("search");
        cfg.search.epsilon = get_or_throw<double>(jq, "epsilon");
        cfg.search.seeds_per_point = get_or_throw<int>(jq, "seeds_per_point");
        cfg.search.full_trace = get_or_throw<bool>(jq, "full_trace");
        for (auto it = jq.at("grids").begin(); it != jq.at("grids").end(); ++it) {
            const BlockId b = block_from_string(it.key());
            if (it.value().contains("values")) {
                SearchGrid g;
                g.values = it.value().at("values").get<std::vector<double>>();
                g.validate();
                cfg.search.grids[b] = g;
            } else {
                cfg.search.grids[b] = SearchGrid::linspace(
                    get_or_throw<double>(it.value(), "cap"),
                    get_or_throw<int>(it.value(), "points"));
            }
        }

        const auto& jc = j.at("combination");
        cfg.combination_sum = jc.at("target_sum").is_null()
                                  ? std::nullopt
                                  : std::optional<double>(jc.at("target_sum").get<double>());
        for (auto it = jc.at("weights").begin(); it != jc.at("weights").end(); ++it) {
            cfg.combination_weights[block_from_string(it.key())] = it.value().get<double>();
        }

        const auto& jsc = j.at("scorer");
        const std::string source = get_or_throw<std::string>(jsc, "source");
        if (source == "local") {
            cfg.scorer.source = ScorerSource::LocalProxy;
        } else if (source == "remote") {
            cfg.scorer.source = ScorerSource::Remote;
        } else {
            throw ConfigError("scorer.source must be local or remote");
        }
        cfg.scorer.endpoint = get_or_throw<std::string>(jsc, "endpoint");
        cfg.scorer.fallback_to_proxy = get_or_throw<bool>(jsc, "fallback_to_proxy");
        cfg.scorer.timeout_ms = get_or_throw<int>(jsc, "timeout_ms");
        cfg.scorer.retries = get_or_throw<int>(jsc, "retries");

        cfg.metrics.k = get_or_throw<int>(j.at("metrics"), "k");
        cfg.metrics.embed_seed = get_or_throw<std::uint64_t>(j.at("metrics"), "embed_seed");

        cfg.out_dir = get_or_throw<std::string>(j, "out_dir");
        cfg.params = j.value("params", nlohmann::json::object());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
    return cfg;
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["model"] = {{"latent_channels", cfg.model.latent_channels},
                  {"latent_size", cfg.model.latent_size},
                  {"widths", cfg.model.widths},
                  {"cond_dim", cfg.model.cond_dim},
                  {"weight_seed", cfg.model.weight_seed}};
    j["sampler"] = {{"steps", cfg.sampler.steps}, {"cfg_scale", cfg.sampler.cfg_scale}};
    j["sampler"]["step_range"] =
        cfg.sampler.step_range ? nlohmann::json(*cfg.sampler.step_range) : nlohmann::json(nullptr);
    j["concepts"] = cfg.concepts;
    j["ref_concepts"] = cfg.ref_concepts;
    j["modifier"] = cfg.modifier ? nlohmann::json(*cfg.modifier) : nlohmann::json(nullptr);
    j["negative_concept"] =
        cfg.negative_concept ? nlohmann::json(*cfg.negative_concept) : nlohmann::json(nullptr);
    j["seeds"] = cfg.seeds;

    nlohmann::json profile = nlohmann::json::object();
    for (const auto& [b, spec] : cfg.hooks.c3_profile) {
        profile[to_string(b)] = {{"lambda", spec.lambda}, {"rho", spec.rho}};
    }
    j["hooks"] = {{"mode", to_string(cfg.hooks.mode)},
                  {"amplify_skips", cfg.hooks.amplify_skips},
                  {"c3_profile", profile},
                  {"freeu",
                   {{"b", cfg.hooks.freeu.b},
                    {"s", cfg.hooks.freeu.s},
                    {"rho_skip", cfg.hooks.freeu.rho_skip}}}};
    j["hooks"]["step_range"] =
        cfg.hooks.step_range ? nlohmann::json(*cfg.hooks.step_range) : nlohmann::json(nullptr);

    nlohmann::json grids = nlohmann::json::object();
    for (const auto& [b, g] : cfg.search.grids) {
        grids[to_string(b)] = {{"values", g.values}};
    }
    j["search"] = {{"epsilon", cfg.search.epsilon},
                   {"seeds_per_point", cfg.search.seeds_per_point},
                   {"full_trace", cfg.search.full_trace},
                   {"grids", grids}};

    nlohmann::json weights = nlohmann::json::object();
    for (const auto& [b, w] : cfg.combination_weights) weights[to_string(b)] = w;
    j["combination"] = {{"weights", weights}};
    j["combination"]["target_sum"] =
        cfg.combination_sum ? nlohmann::json(*cfg.combination_sum) : nlohmann::json(nullptr);

    j["scorer"] = {{"source", cfg.scorer.source == ScorerSource::Remote ? "remote" : "local"},
                   {"endpoint", cfg.scorer.endpoint},
                   {"fallback_to_proxy", cfg.scorer.fallback_to_proxy},
                   {"timeout_ms", cfg.scorer.timeout_ms},
                   {"retries", cfg.scorer.retries}};
    j["metrics"] = {{"k", cfg.metrics.k}, {"embed_seed", cfg.metrics.embed_seed}};
    j["out_dir"] = cfg.out_dir;
    j["params"] = cfg.params;
    return j;
}

std::string config_hash(const nlohmann::json& canonical) {
    const std::string dump = canonical.dump();
    const std::uint64_t h = fnv1a64(dump);
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ScorerBundle make_bundle(const ScorerConfig& cfg) {
    if (cfg.source == ScorerSource::LocalProxy) return make_local_bundle();
    RemoteScorerConfig rc;
    rc.endpoint = cfg.endpoint;
    rc.timeout_ms = cfg.timeout_ms;
    rc.retries = cfg.retries;
    rc.fallback_to_proxy = cfg.fallback_to_proxy;
    return make_remote_bundle(rc);
}

nlohmann::json profile_to_json(const AmplificationProfile& profile,
                               const std::map<BlockId, double>& shares, double target_sum) {
    nlohmann::json blocks = nlohmann::json::object();
    for (const auto& [b, spec] : profile) {
        nlohmann::json jb = {{"lambda", spec.lambda}, {"rho", spec.rho}};
        auto it = shares.find(b);
        if (it != shares.end()) jb["s"] = it->second;
        blocks[to_string(b)] = jb;
    }
    return nlohmann::json{{"target_sum", target_sum}, {"blocks", blocks}};
}

AmplificationProfile profile_from_json(const nlohmann::json& j) {
    AmplificationProfile profile;
    const nlohmann::json& blocks = j.contains("blocks") ? j.at("blocks") : j;
    for (auto it = blocks.begin(); it != blocks.end(); ++it) {
        AmplificationSpec spec;
        spec.lambda = it.value().at("lambda").get<double>();
        spec.rho = it.value().at("rho").get<double>();
        profile[block_from_string(it.key())] = spec;
    }
    return profile;
}

}  // namespace c3
