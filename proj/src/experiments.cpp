#include "c3/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>

#include "c3/io.hpp"

namespace c3 {

namespace {

namespace fs = std::filesystem;

constexpr double kReportCutoff = 0.25;  // band split used for image diagnostics

// Run fn(i) for i in [0, n) on opt.jobs workers. Work items are independent
// and indexed, so results are identical for any worker count.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
    jobs = std::max(1, std::min(jobs, n));
    if (jobs == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(jobs);
    for (int w = 0; w < jobs; ++w) {
        workers.emplace_back([&, w] {
            try {
                int i;
                while ((i = next.fetch_add(1)) < n) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : workers) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

FeatureMap image_as_map(const Image& img) {
    FeatureMap m(3, img.size, img.size);
    m.data = img.data;
    return m;
}

double image_hbe(const Image& img) { return high_band_energy(image_as_map(img), kReportCutoff); }

double embed_distance(const FeatureVector& a, const FeatureVector& b) {
    double cos = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) cos += a[i] * b[i];
    return 1.0 - cos;
}

struct Runner {
    const ExperimentConfig& cfg;
    const RunOptions& opt;
    std::string command;
    DenoiserModel model;
    Embedder embedder;
    ScorerBundle bundle;
    std::vector<std::string> files;

    Runner(const ExperimentConfig& c, const RunOptions& o, std::string cmd)
        : cfg(c),
          opt(o),
          command(std::move(cmd)),
          model(build_model(c.model)),
          embedder(Embedder::build(c.metrics.embed_seed)),
          bundle(make_bundle(c.scorer)) {
        ensure_directory(cfg.out_dir);
    }

    std::string path(const std::string& rel) const { return cfg.out_dir + "/" + rel; }

    void record(const std::string& rel) { files.push_back(rel); }

    void save_image(const std::string& rel, const Image& img) {
        write_ppm(path(rel), img);
        record(rel);
    }

    void save_json(const std::string& rel, const nlohmann::json& j) {
        write_text_file(path(rel), j.dump(2) + "\n");
        record(rel);
    }

    void save_latent(const std::string& rel, const FeatureMap& latent) {
        save_tensor(path(rel), latent);
        record(rel);
    }

    /// Images for seeds 0..n-1, deterministic in content and order.
    std::vector<SampleResult> generate(const ConditioningSpec& cond, const HookSet& hooks, int n,
                                       const SamplerConfig* sampler = nullptr) const {
        const SamplerConfig& sc = sampler ? *sampler : cfg.sampler;
        std::vector<SampleResult> out(n);
        parallel_for(n, opt.jobs, [&](int seed) {
            out[seed] = sample(model, sc, cond, static_cast<std::uint64_t>(seed), hooks);
        });
        return out;
    }

    void finish() {
        std::sort(files.begin(), files.end());
        nlohmann::json manifest;
        manifest["command"] = command;
        manifest["config_hash"] = config_hash(config_to_json(cfg));
        manifest["tool_version"] = tool_version();
        manifest["timestamp"] = timestamp_utc();
        manifest["files"] = files;
        write_text_file(path("manifest.json"), manifest.dump(2) + "\n");
    }
};

HookSet no_hooks() { return HookSet{}; }

HookSet c3_hooks(const AmplificationProfile& profile, bool amplify_skips = true,
                 std::optional<std::array<int, 2>> step_range = std::nullopt) {
    HookSet h;
    h.mode = HookMode::C3;
    h.c3_profile = profile;
    h.amplify_skips = amplify_skips;
    h.step_range = step_range;
    return h;
}

/// The profile every hooked generation uses: the config's when nonempty,
/// otherwise a single moderate first-block amplification.
AmplificationProfile effective_profile(const ExperimentConfig& cfg) {
    if (cfg.hooks.mode == HookMode::C3 && !cfg.hooks.c3_profile.empty()) {
        return cfg.hooks.c3_profile;
    }
    return {{BlockId::Down0, AmplificationSpec{2.0, 0.25}}};
}

SearchGrid grid_for_block(const ExperimentConfig& cfg, BlockId block) {
    auto it = cfg.search.grids.find(block);
    if (it != cfg.search.grids.end()) return it->second;
    // Up blocks have no dedicated search grid; reuse the shallow-block one.
    return SearchGrid::linspace(2.0, 5);
}

LambdaImageGenerator single_block_generator(const Runner& run, const ConditioningSpec& cond,
                                            BlockId block, double rho) {
    return [&run, cond, block, rho](double lambda, int seed) {
        HookSet hooks;
        if (lambda != 1.0) {
            hooks = c3_hooks({{block, AmplificationSpec{lambda, rho}}});
        }
        return sample(run.model, run.cfg.sampler, cond, static_cast<std::uint64_t>(seed), hooks)
            .image;
    };
}

std::vector<BlockSelection> load_selections(const Runner& run) {
    const std::string dir =
        run.cfg.params.value("selections_dir", run.cfg.out_dir + "/selections");
    std::vector<BlockSelection> sels;
    for (BlockId b : kCatalystBlocks) {
        const std::string file = dir + "/selection_" + to_string(b) + ".json";
        if (fs::exists(file)) {
            sels.push_back(selection_from_json(nlohmann::json::parse(read_text_file(file))));
        }
    }
    if (sels.empty()) {
        throw ConfigError("no selection files found under " + dir + "; run the select command first");
    }
    return sels;
}

std::string seed_name(const std::string& stem, int seed) {
    return stem + "_s" + std::to_string(seed) + ".ppm";
}

}  // namespace

const char* tool_version() { return "0.1.0"; }

void cmd_gen(const ExperimentConfig& cfg, const RunOptions& opt) {
    Runner run(cfg, opt, "gen");
    ensure_directory(run.path("images"));
    if (opt.dump_latents) ensure_directory(run.path("latents"));

    CsvWriter csv(run.path("index.csv"),
                  {"concept", "seed", "variant", "file", "aesthetic", "alignment", "usability"});
    run.record("index.csv");
    const std::string variant = [&] {
        switch (cfg.hooks.mode) {
            case HookMode::C3: return "c3";
            case HookMode::FreeU: return "freeu";
            default: return "none";
        }
    }();

    for (const std::string& concept_name : cfg.concepts) {
        const ConditioningSpec cond = cfg.conditioning(concept_name);
        const auto base = run.generate(cond, no_hooks(), cfg.seeds);
        const auto hooked = run.generate(cond, cfg.hooks, cfg.seeds);
        for (int seed = 0; seed < cfg.seeds; ++seed) {
            const UsabilityContext ctx{cond, base[seed].image};
            const std::string stem = concept_name + "_" + std::to_string(seed);
            const std::pair<std::string, const SampleResult*> outputs[2] = {
                {"base", &base[seed]}, {variant, &hooked[seed]}};
            for (const auto& [tag, res] : outputs) {
                const std::string rel = "images/" + stem + "_" + tag + ".ppm";
                run.save_image(rel, res->image);
                const double aest = run.bundle.aesthetic(res->image);
                const double align = run.bundle.alignment(res->image, ctx);
                csv.row({concept_name, std::to_string(seed), tag, rel, fmt_g6(aest),
                         fmt_g6(align), fmt_g6(aest + align)});
                if (opt.dump_latents) {
                    run.save_latent("latents/" + stem + "_" + tag + ".c3tf", res->final_latent);
                }
            }
        }
    }
    run.finish();
}

void cmd_ablate_blocks(const ExperimentConfig& cfg, const RunOptions& opt) {
    Runner run(cfg, opt, "ablate-blocks");
    ensure_directory(run.path("images"));
    const ConditioningSpec cond = cfg.conditioning(cfg.concepts.front());
    const auto base = run.generate(cond, no_hooks(), cfg.seeds);
    std::vector<FeatureVector> base_feats(cfg.seeds);
    for (int s = 0; s < cfg.seeds; ++s) base_feats[s] = embed_image(base[s].image, run.embedder);
    const auto cuts = cfg.cutoffs();

    CsvWriter csv(run.path("ablate_blocks.csv"),
                  {"block", "lambda", "seed", "usability", "distance", "hbe"});
    run.record("ablate_blocks.csv");

    for (BlockId block : kAllBlocks) {
        const SearchGrid grid = grid_for_block(cfg, block);
        for (double lambda : grid.values) {
            const HookSet hooks = c3_hooks({{block, AmplificationSpec{lambda, cuts.at(block)}}});
            const auto imgs = run.generate(cond, hooks, cfg.seeds);
            for (int seed = 0; seed < cfg.seeds; ++seed) {
                const Image& img = imgs[seed].image;
                const UsabilityContext ctx{cond, base[seed].image};
                const double use = usability(img, ctx, run.bundle);
                const double dist =
                    embed_distance(embed_image(img, run.embedder), base_feats[seed]);
                csv.row({to_string(block), fmt_g6(lambda), std::to_string(seed), fmt_g6(use),
                         fmt_g6(dist), fmt_g6(image_hbe(img))});
                run.save_image("images/" + std::string(to_string(block)) + "_l" + fmt_g6(lambda) +
                                   "_s" + std::to_string(seed) + ".ppm",
                               img);
            }
        }
    }
    run.finish();
}

void cmd_ablate_frequency(const ExperimentConfig& cfg, const RunOptions& opt) {
    Runner run(cfg, opt, "ablate-frequency");
    const double lambda = cfg.params.value("lambda", 2.0);
    const double rho_low = cfg.params.value("rho_low", 0.25);
    const BlockId block = block_from_string(cfg.params.value("block", std::string("Down0")));
    const ConditioningSpec cond = cfg.conditioning(cfg.concepts.front());
    const auto base = run.generate(cond, no_hooks(), cfg.seeds);

    CsvWriter csv(run.path("ablate_frequency.csv"), {"seed", "variant", "hbe", "usability"});
    run.record("ablate_frequency.csv");

    const std::pair<std::string, double> variants[2] = {{"allband", 1.0}, {"lowband", rho_low}};
    for (const auto& [name, rho] : variants) {
        const HookSet hooks = c3_hooks({{block, AmplificationSpec{lambda, rho}}});
        const auto imgs = run.generate(cond, hooks, cfg.seeds);
        for (int seed = 0; seed < cfg.seeds; ++seed) {
            const UsabilityContext ctx{cond, base[seed].image};
            csv.row({std::to_string(seed), name, fmt_g6(image_hbe(imgs[seed].image)),
                     fmt_g6(usability(imgs[seed].image, ctx, run.bundle))});
        }
    }
    run.finish();
}

void cmd_select(const ExperimentConfig& cfg, const RunOptions& opt) {
    Runner run(cfg, opt, "select");
    ensure_directory(run.path("selections"));
    const ConditioningSpec cond = cfg.conditioning(cfg.concepts.front());
    const auto cuts = cfg.cutoffs();

    CsvWriter csv(run.path("selection_summary.csv"),
                  {"block", "cap", "lambda_star", "baseline_use", "threshold"});
    run.record("selection_summary.csv");

    for (BlockId block : kCatalystBlocks) {
        const auto gen = single_block_generator(run, cond, block, cuts.at(block));
        const ContextBuilder make_ctx = [&cond](int, const Image& baseline) {
            return UsabilityContext{cond, baseline};
        };
        const BlockSelection sel = select_lambda(block, cfg.search, gen, make_ctx, run.bundle);
        run.save_json("selections/selection_" + std::string(to_string(block)) + ".json",
                      selection_to_json(sel));
        const double baseline_use = sel.trace.front().mean_usability;
        csv.row({to_string(block), fmt_g6(cfg.search.grids.at(block).cap()),
                 fmt_g6(sel.lambda_star), fmt_g6(baseline_use),
                 fmt_g6(cfg.search.epsilon * baseline_use)});
    }
    run.finish();
}

void cmd_combine(const ExperimentConfig& cfg, const RunOptions& opt) {
    Runner run(cfg, opt, "combine");
    ensure_directory(run.path("images"));
    const std::vector<BlockSelection> sels = load_selections(run);
    const CombinationConfig cc = cfg.combination();
    const AmplificationProfile profile = combine(sels, cc, cfg.cutoffs());
    run.save_json("profile.json",
                  profile_to_json(profile, combination_shares(sels, cc), cc.target_sum));

    const ConditioningSpec cond = cfg.conditioning(cfg.concepts.front());
    const auto imgs = run.generate(cond, c3_hooks(profile), cfg.seeds);
    for (int seed = 0; seed < cfg.seeds; ++seed) {
        run.save_image(seed_name("images/combined", seed), imgs[seed].image);
    }
    run.finish();
}

void cmd_quant(const ExperimentConfig& cfg, const RunOptions& opt) {
    Runner run(cfg, opt, "quant");
    if (cfg.seeds < cfg.metrics.k + 2) {
        throw ConfigError("quant needs seeds >= metrics.k + 2");
    }
    const AmplificationProfile profile = [&] {
        const std::string file = cfg.params.value("profile_file", std::string());
        if (!file.empty()) return profile_from_json(nlohmann::json::parse(read_text_file(file)));
        return effective_profile(cfg);
    }();

    ensure_directory(run.path("reports"));
    std::vector<std::string> header = {"concept"};
    for (const std::string& col : MetricsReport::csv_header()) header.push_back(col);
    header.push_back("ref_fid_star");
    CsvWriter csv(run.path("quant.csv"), header);
    run.record("quant.csv");

    std::vector<MetricsReport> reports;
    for (const std::string& concept_name : cfg.concepts) {
        const ConditioningSpec cond = cfg.conditioning(concept_name);
        const auto plain = run.generate(cond, no_hooks(), cfg.seeds);
        const auto amplified = run.generate(cond, c3_hooks(profile), cfg.seeds);

        std::vector<Image> plain_imgs, amp_imgs;
        for (const auto& r : plain) plain_imgs.push_back(r.image);
        for (const auto& r : amplified) amp_imgs.push_back(r.image);

        MetricsReport report = build_report(plain_imgs, amp_imgs, plain_imgs, run.embedder,
                                            cfg.metrics.k, run.bundle, cond);
        auto ref_it = cfg.ref_concepts.find(concept_name);
        if (ref_it != cfg.ref_concepts.end()) {
            const ConditioningSpec ref_cond = cfg.conditioning(ref_it->second);
            const auto ref = run.generate(ref_cond, no_hooks(), cfg.seeds);
            std::vector<FeatureVector> plain_feats, ref_feats;
            for (const auto& r : plain) plain_feats.push_back(embed_image(r.image, run.embedder));
            for (const auto& r : ref) ref_feats.push_back(embed_image(r.image, run.embedder));
            report.ref_fid_star =
                frechet(GaussianMoments::fit(plain_feats), GaussianMoments::fit(ref_feats));
        }
        reports.push_back(report);
        run.save_json("reports/" + concept_name + ".json", report.to_json());

        std::vector<std::string> cells = {concept_name};
        for (const std::string& c : report.csv_cells()) cells.push_back(c);
        cells.push_back(report.ref_fid_star ? fmt_g6(*report.ref_fid_star) : "");
        csv.row(cells);
    }

    // Aggregate mean and sample std across concepts, one row each.
    auto aggregate = [&](auto field) {
        std::vector<double> vals;
        for (const auto& r : reports) vals.push_back(field(r));
        double mean = 0.0;
        for (double v : vals) mean += v;
        mean /= static_cast<double>(vals.size());
        double var = 0.0;
        for (double v : vals) var += (v - mean) * (v - mean);
        const double stddev =
            vals.size() > 1 ? std::sqrt(var / static_cast<double>(vals.size() - 1)) : 0.0;
        return std::pair<double, double>{mean, stddev};
    };
    const std::vector<std::function<double(const MetricsReport&)>> fields = {
        [](const MetricsReport& r) { return r.fid_star; },
        [](const MetricsReport& r) { return r.precision_star; },
        [](const MetricsReport& r) { return r.recall; },
        [](const MetricsReport& r) { return r.lpips_mean; },
        [](const MetricsReport& r) { return r.vendi; },
        [](const MetricsReport& r) { return r.alignment_mean; }};
    nlohmann::json agg;
    const char* names[] = {"fid_star", "precision_star", "recall",
                           "lpips_mean", "vendi",         "alignment_mean"};
    std::vector<std::string> mean_row = {"mean", std::to_string(cfg.seeds),
                                         std::to_string(cfg.seeds), std::to_string(cfg.metrics.k)};
    std::vector<std::string> std_row = {"std", std::to_string(cfg.seeds),
                                        std::to_string(cfg.seeds), std::to_string(cfg.metrics.k)};
    for (std::size_t i = 0; i < fields.size(); ++i) {
        const auto [mean, stddev] = aggregate(fields[i]);
        agg[names[i]] = {{"mean", mean}, {"std", stddev}};
        mean_row.push_back(fmt_g6(mean));
        std_row.push_back(fmt_g6(stddev));
    }
    mean_row.push_back("");
    std_row.push_back("");
    csv.row(mean_row);
    csv.row(std_row);
    run.save_json("reports/aggregate.json", agg);
    run.finish();
}

void cmd_sweep(const ExperimentConfig& cfg, const RunOptions& opt) {
    Runner run(cfg, opt, "sweep");
    const std::string param = cfg.params.value("param", std::string("cutoff"));

    CsvWriter csv(run.path("sweep.csv"),
                  {"param", "value", "seed", "lambda_star", "usability", "distance", "hbe"});
    run.record("sweep.csv");

    struct Row {
        double value;
        double mean_use = 0, mean_dist = 0, mean_hbe = 0;
    };
    std::vector<Row> svg_rows;

    // Emit one row per seed for a generation batch against its own baseline.
    auto emit = [&](const std::string& value_label, double value_num,
                    const ConditioningSpec& cond, const HookSet& hooks,
                    const SamplerConfig& sampler, const std::string& lambda_star) {
        const auto base = run.generate(cond, no_hooks(), cfg.seeds, &sampler);
        const auto imgs = run.generate(cond, hooks, cfg.seeds, &sampler);
        Row row{value_num};
        for (int seed = 0; seed < cfg.seeds; ++seed) {
            const UsabilityContext ctx{cond, base[seed].image};
            const double use = usability(imgs[seed].image, ctx, run.bundle);
            const double dist = embed_distance(embed_image(imgs[seed].image, run.embedder),
                                               embed_image(base[seed].image, run.embedder));
            const double hbe = image_hbe(imgs[seed].image);
            csv.row({param, value_label, std::to_string(seed), lambda_star, fmt_g6(use),
                     fmt_g6(dist), fmt_g6(hbe)});
            row.mean_use += use;
            row.mean_dist += dist;
            row.mean_hbe += hbe;
        }
        row.mean_use /= cfg.seeds;
        row.mean_dist /= cfg.seeds;
        row.mean_hbe /= cfg.seeds;
        svg_rows.push_back(row);
    };

    const ConditioningSpec cond = cfg.conditioning(cfg.concepts.front());

    if (param == "cutoff") {
        const std::vector<double> values =
            cfg.params.value("values", std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
        for (double rho : values) {
            AmplificationProfile profile = effective_profile(cfg);
            for (auto& [b, spec] : profile) spec.rho = rho;
            emit(fmt_g6(rho), rho, cond, c3_hooks(profile), cfg.sampler, "");
        }
    } else if (param == "epsilon") {
        const std::vector<double> values =
            cfg.params.value("values", std::vector<double>{0.5, 0.7, 0.9});
        const BlockId block = block_from_string(cfg.params.value("block", std::string("Down2")));
        const double rho = cfg.cutoffs().at(block);
        for (double eps : values) {
            SearchConfig search = cfg.search;
            search.epsilon = eps;
            const BlockSelection sel = select_lambda(
                block, search, single_block_generator(run, cond, block, rho),
                [&cond](int, const Image& baseline) { return UsabilityContext{cond, baseline}; },
                run.bundle);
            const HookSet hooks = c3_hooks({{block, AmplificationSpec{sel.lambda_star, rho}}});
            emit(fmt_g6(eps), eps, cond, hooks, cfg.sampler, fmt_g6(sel.lambda_star));
        }
    } else if (param == "scale_sum") {
        const std::vector<double> values =
            cfg.params.value("values", std::vector<double>{0.4, 0.6, 0.8, 1.0});
        const std::vector<BlockSelection> sels = load_selections(run);
        for (double s : values) {
            CombinationConfig cc = cfg.combination();
            cc.target_sum = s;
            emit(fmt_g6(s), s, cond, c3_hooks(combine(sels, cc, cfg.cutoffs())), cfg.sampler, "");
        }
    } else if (param == "step_range") {
        std::vector<std::array<int, 2>> values;
        if (cfg.params.contains("values")) {
            for (const auto& v : cfg.params.at("values")) {
                values.push_back({v.at(0).get<int>(), v.at(1).get<int>()});
            }
        } else {
            for (int s = 0; s < cfg.sampler.steps; ++s) values.push_back({0, s});
        }
        int idx = 0;
        for (const auto& range : values) {
            const HookSet hooks = c3_hooks(effective_profile(cfg), cfg.hooks.amplify_skips, range);
            emit(std::to_string(range[0]) + ":" + std::to_string(range[1]), idx++, cond, hooks,
                 cfg.sampler, "");
        }
    } else if (param == "cfg") {
        const std::vector<double> values =
            cfg.params.value("values", std::vector<double>{0.0, 1.0, 2.0, 5.0});
        for (double g : values) {
            SamplerConfig sampler = cfg.sampler;
            sampler.cfg_scale = g;
            emit(fmt_g6(g), g, cond, c3_hooks(effective_profile(cfg)), sampler, "");
        }
    } else {
        throw ConfigError("unknown sweep param: " + param +
                          " (expected cutoff|epsilon|scale_sum|step_range|cfg)");
    }

    if (opt.svg) {
        SvgSeries use{"usability", {}}, dist{"distance", {}}, hbe{"hbe", {}};
        for (const Row& r : svg_rows) {
            use.points.push_back({r.value, r.mean_use});
            dist.points.push_back({r.value, r.mean_dist});
            hbe.points.push_back({r.value, r.mean_hbe});
        }
        write_svg_plot(run.path("sweep.svg"), "sweep: " + param, {use, dist, hbe});
        run.record("sweep.svg");
    }
    run.finish();
}

void cmd_ablate_modifier(const ExperimentConfig& cfg, const RunOptions& opt) {
    Runner run(cfg, opt, "ablate-modifier");
    ensure_directory(run.path("images"));
    const AmplificationProfile profile = effective_profile(cfg);

    CsvWriter csv(run.path("ablate_modifier.csv"),
                  {"concept", "fid_on_off_with_modifier", "fid_on_off_without_modifier"});
    run.record("ablate_modifier.csv");

    for (const std::string& concept_name : cfg.concepts) {
        double fids[2];
        for (int with_mod = 1; with_mod >= 0; --with_mod) {
            ConditioningSpec cond = cfg.conditioning(concept_name);
            if (!with_mod) cond.modifier.reset();
            const auto off = run.generate(cond, no_hooks(), cfg.seeds);
            const auto on = run.generate(cond, c3_hooks(profile), cfg.seeds);

            std::vector<FeatureVector> on_feats, off_feats;
            for (int seed = 0; seed < cfg.seeds; ++seed) {
                const std::string tag = with_mod ? "mod" : "nomod";
                run.save_image("images/" + concept_name + "_" + tag + "_off_s" +
                                   std::to_string(seed) + ".ppm",
                               off[seed].image);
                run.save_image("images/" + concept_name + "_" + tag + "_on_s" +
                                   std::to_string(seed) + ".ppm",
                               on[seed].image);
                on_feats.push_back(embed_image(on[seed].image, run.embedder));
                off_feats.push_back(embed_image(off[seed].image, run.embedder));
            }
            fids[with_mod] =
                frechet(GaussianMoments::fit(on_feats), GaussianMoments::fit(off_feats));
        }
        csv.row({concept_name, fmt_g6(fids[1]), fmt_g6(fids[0])});
    }
    run.finish();
}

void cmd_freeu_compare(const ExperimentConfig& cfg, const RunOptions& opt) {
    Runner run(cfg, opt, "freeu-compare");
    const std::vector<double> b_grid =
        cfg.params.value("b_grid", std::vector<double>{0.8, 1.0, 1.2, 1.5});
    const std::vector<double> s_grid =
        cfg.params.value("s_grid", std::vector<double>{0.5, 1.0, 1.5});

    const ConditioningSpec cond = cfg.conditioning(cfg.concepts.front());
    const auto base = run.generate(cond, no_hooks(), cfg.seeds);
    std::vector<FeatureVector> base_feats(cfg.seeds);
    for (int s = 0; s < cfg.seeds; ++s) base_feats[s] = embed_image(base[s].image, run.embedder);

    CsvWriter csv(run.path("freeu_compare.csv"),
                  {"mode", "b", "s", "seed", "usability", "distance", "hbe"});
    run.record("freeu_compare.csv");

    auto emit = [&](const std::string& mode, const std::string& b_label,
                    const std::string& s_label, const std::vector<SampleResult>& imgs) {
        for (int seed = 0; seed < cfg.seeds; ++seed) {
            const UsabilityContext ctx{cond, base[seed].image};
            csv.row({mode, b_label, s_label, std::to_string(seed),
                     fmt_g6(usability(imgs[seed].image, ctx, run.bundle)),
                     fmt_g6(embed_distance(embed_image(imgs[seed].image, run.embedder),
                                           base_feats[seed])),
                     fmt_g6(image_hbe(imgs[seed].image))});
        }
    };

    for (double b : b_grid) {
        for (double s : s_grid) {
            HookSet hooks;
            hooks.mode = HookMode::FreeU;
            hooks.freeu = FreeUSpec{b, s, cfg.hooks.freeu.rho_skip};
            emit("freeu", fmt_g6(b), fmt_g6(s), run.generate(cond, hooks, cfg.seeds));
        }
    }
    emit("c3", "", "", run.generate(cond, c3_hooks(effective_profile(cfg)), cfg.seeds));
    run.finish();
}

void cmd_template_sweep(const ExperimentConfig& cfg, const RunOptions& opt) {
    Runner run(cfg, opt, "template-sweep");
    ensure_directory(run.path("images"));
    const std::vector<std::string> modifiers = {"creative", "rare", "innovative", "ingenious"};
    const AmplificationProfile profile = effective_profile(cfg);

    CsvWriter rows(run.path("template_rows.csv"), {"modifier", "seed", "usability", "file"});
    run.record("template_rows.csv");
    CsvWriter summary(run.path("template_summary.csv"),
                      {"modifier", "mean_usability", "pairwise_diversity"});
    run.record("template_summary.csv");

    for (const std::string& mod : modifiers) {
        ConditioningSpec cond = cfg.conditioning(cfg.concepts.front());
        cond.modifier = mod;
        const auto base = run.generate(cond, no_hooks(), cfg.seeds);
        const auto imgs = run.generate(cond, c3_hooks(profile), cfg.seeds);

        std::vector<Image> images;
        double mean_use = 0.0;
        for (int seed = 0; seed < cfg.seeds; ++seed) {
            const std::string rel = "images/" + mod + "_s" + std::to_string(seed) + ".ppm";
            run.save_image(rel, imgs[seed].image);
            const double use =
                usability(imgs[seed].image, UsabilityContext{cond, base[seed].image}, run.bundle);
            rows.row({mod, std::to_string(seed), fmt_g6(use), rel});
            mean_use += use;
            images.push_back(imgs[seed].image);
        }
        summary.row({mod, fmt_g6(mean_use / cfg.seeds),
                     fmt_g6(cfg.seeds > 1 ? pairwise_diversity(images, run.embedder) : 0.0)});
    }
    run.finish();
}

}  // namespace c3
