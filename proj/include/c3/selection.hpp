#pragma once

#include <functional>
#include <map>
#include <vector>

#include "c3/denoiser.hpp"
#include "c3/scorer.hpp"
#include "json.hpp"

namespace c3 {

/// Candidate amplification factors, strictly increasing from 1.0 to the cap.
struct SearchGrid {
    std::vector<double> values;

    static SearchGrid linspace(double cap, int points);
    void validate() const;
    double cap() const { return values.back(); }
};

struct SearchConfig {
    double epsilon = 0.85;  // usability bumper
    std::map<BlockId, SearchGrid> grids;
    int seeds_per_point = 4;
    bool full_trace = false;  // evaluate every grid point even after the first feasible one

    static SearchConfig defaults();
};

struct TracePoint {
    double lambda = 1.0;
    double mean_usability = 0.0;
    bool feasible = true;
};

struct BlockSelection {
    BlockId block = BlockId::Down0;
    double lambda_star = 1.0;
    std::vector<TracePoint> trace;  // ascending lambda
};

using LambdaImageGenerator = std::function<Image(double lambda, int seed_index)>;
using ContextBuilder = std::function<UsabilityContext(int seed_index, const Image& baseline)>;

/// Largest grid factor whose mean usability over seeds_per_point generations
/// stays at or above epsilon times the unamplified mean. Scans from the cap
/// downward and may stop at the first feasible point; the trace records every
/// evaluated point. The unamplified point is always feasible, so a result
/// always exists.
BlockSelection select_lambda(BlockId block, const SearchConfig& cfg,
                             const LambdaImageGenerator& generate, const ContextBuilder& make_ctx,
                             const ScorerBundle& bundle);

struct CombinationConfig {
    double target_sum = 0.6;              // 1.0 for the 1-step regime
    std::map<BlockId, double> weights;    // missing entries default to 1.0
};

/// Distribute the excess-amplification budget: s_l = S * w_l / sum(w), then
/// lambda_l = 1 + s_l * (lambda*_l - 1). The s_l sum to S exactly and a
/// single block with S = 1 keeps its selected factor unchanged.
AmplificationProfile combine(const std::vector<BlockSelection>& selections,
                             const CombinationConfig& cfg,
                             const std::map<BlockId, double>& cutoffs);

/// Per-block scale shares s_l of the profile produced by combine().
std::map<BlockId, double> combination_shares(const std::vector<BlockSelection>& selections,
                                             const CombinationConfig& cfg);

nlohmann::json selection_to_json(const BlockSelection& sel);
BlockSelection selection_from_json(const nlohmann::json& j);

}  // namespace c3
