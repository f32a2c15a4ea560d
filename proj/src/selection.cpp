#include "c3/selection.hpp"

#include <algorithm>
#include <cmath>

namespace c3 {

SearchGrid SearchGrid::linspace(double cap, int points) {
    if (points < 2) throw DomainError("search grid needs at least 2 points");
    if (!(cap > 1.0)) throw DomainError("search grid cap must exceed 1.0");
    SearchGrid g;
    g.values.resize(points);
    for (int i = 0; i < points; ++i) {
        g.values[i] = 1.0 + (cap - 1.0) * i / (points - 1);
    }
    g.values.front() = 1.0;
    g.values.back() = cap;
    return g;
}

void SearchGrid::validate() const {
    if (values.size() < 2) throw DomainError("search grid needs at least 2 points");
    if (values.front() != 1.0) throw DomainError("search grid must start at 1.0");
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (!(values[i] > values[i - 1])) {
            throw DomainError("search grid values must be strictly increasing");
        }
    }
}

SearchConfig SearchConfig::defaults() {
    SearchConfig cfg;
    cfg.grids[BlockId::Down0] = SearchGrid::linspace(2.0, 5);
    cfg.grids[BlockId::Down1] = SearchGrid::linspace(2.0, 5);
    cfg.grids[BlockId::Down2] = SearchGrid::linspace(10.0, 10);
    cfg.grids[BlockId::Mid] = SearchGrid::linspace(10.0, 10);
    return cfg;
}

BlockSelection select_lambda(BlockId block, const SearchConfig& cfg,
                             const LambdaImageGenerator& generate, const ContextBuilder& make_ctx,
                             const ScorerBundle& bundle) {
    if (!(cfg.epsilon >= 0.0 && cfg.epsilon <= 1.0)) {
        throw DomainError("usability bumper must lie in [0, 1]");
    }
    if (cfg.seeds_per_point < 1) throw DomainError("seeds_per_point must be >= 1");
    auto it = cfg.grids.find(block);
    if (it == cfg.grids.end()) throw DomainError(std::string("no search grid for block ") + to_string(block));
    const SearchGrid& grid = it->second;
    grid.validate();
    const int m = cfg.seeds_per_point;

    // Baseline generations define both the feasibility threshold and the
    // alignment contexts for every other grid point.
    std::vector<Image> baselines(m);
    std::vector<UsabilityContext> ctxs(m);
    double base_use = 0.0;
    for (int s = 0; s < m; ++s) {
        baselines[s] = generate(1.0, s);
        ctxs[s] = make_ctx(s, baselines[s]);
        base_use += usability(baselines[s], ctxs[s], bundle);
    }
    base_use /= m;
    const double threshold = cfg.epsilon * base_use;

    BlockSelection sel;
    sel.block = block;
    sel.lambda_star = 1.0;
    sel.trace.push_back({1.0, base_use, true});

    bool found = false;
    for (std::size_t i = grid.values.size(); i-- > 1;) {
        const double lambda = grid.values[i];
        double use = 0.0;
        for (int s = 0; s < m; ++s) {
            use += usability(generate(lambda, s), ctxs[s], bundle);
        }
        use /= m;
        const bool feasible = use >= threshold;
        sel.trace.push_back({lambda, use, feasible});
        if (feasible && !found) {
            sel.lambda_star = lambda;
            found = true;
            if (!cfg.full_trace) break;
        }
    }

    std::sort(sel.trace.begin(), sel.trace.end(),
              [](const TracePoint& a, const TracePoint& b) { return a.lambda < b.lambda; });
    return sel;
}

std::map<BlockId, double> combination_shares(const std::vector<BlockSelection>& selections,
                                             const CombinationConfig& cfg) {
    if (selections.empty()) throw DomainError("combine: no block selections given");
    if (!(cfg.target_sum > 0.0)) throw DomainError("combine: target sum must be > 0");

    double wsum = 0.0;
    std::map<BlockId, double> weights;
    for (const BlockSelection& sel : selections) {
        auto it = cfg.weights.find(sel.block);
        const double w = (it == cfg.weights.end()) ? 1.0 : it->second;
        if (!(w > 0.0)) {
            throw DomainError(std::string("combine: weight for ") + to_string(sel.block) +
                              " must be > 0");
        }
        if (weights.count(sel.block)) {
            throw DomainError(std::string("combine: duplicate selection for ") +
                              to_string(sel.block));
        }
        weights[sel.block] = w;
        wsum += w;
    }
    std::map<BlockId, double> shares;
    for (auto& [block, w] : weights) shares[block] = cfg.target_sum * w / wsum;
    return shares;
}

AmplificationProfile combine(const std::vector<BlockSelection>& selections,
                             const CombinationConfig& cfg,
                             const std::map<BlockId, double>& cutoffs) {
    const std::map<BlockId, double> shares = combination_shares(selections, cfg);
    AmplificationProfile profile;
    for (const BlockSelection& sel : selections) {
        const double s = shares.at(sel.block);
        AmplificationSpec spec;
        // s == 1 must be an exact no-op, not just one up to rounding.
        spec.lambda = (s == 1.0) ? sel.lambda_star : 1.0 + s * (sel.lambda_star - 1.0);
        auto it = cutoffs.find(sel.block);
        spec.rho = (it == cutoffs.end()) ? 0.25 : it->second;
        profile[sel.block] = spec;
    }
    return profile;
}

nlohmann::json selection_to_json(const BlockSelection& sel) {
    nlohmann::json j;
    j["block"] = to_string(sel.block);
    j["lambda_star"] = sel.lambda_star;
    nlohmann::json trace = nlohmann::json::array();
    for (const TracePoint& p : sel.trace) {
        trace.push_back({p.lambda, p.mean_usability, p.feasible});
    }
    j["trace"] = trace;
    return j;
}

BlockSelection selection_from_json(const nlohmann::json& j) {
    BlockSelection sel;
    sel.block = block_from_string(j.at("block").get<std::string>());
    sel.lambda_star = j.at("lambda_star").get<double>();
    for (const auto& p : j.at("trace")) {
        sel.trace.push_back({p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<bool>()});
    }
    return sel;
}

}  // namespace c3
