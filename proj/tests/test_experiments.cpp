#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "c3/experiments.hpp"
#include "c3/io.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace c3;
namespace fs = std::filesystem;

namespace {

// Small model + sampler so each command runs in well under a second.
nlohmann::json small_config_json(const std::string& out_dir) {
    nlohmann::json j = default_config_json();
    j["model"]["latent_size"] = 16;
    j["model"]["widths"] = {8, 16, 32, 32};
    j["sampler"]["steps"] = 2;
    j["seeds"] = 3;
    j["concepts"] = {"chair", "car"};
    j["search"]["seeds_per_point"] = 2;
    j["search"]["grids"] = {{"Down0", {{"cap", 2.0}, {"points", 3}}},
                            {"Down1", {{"cap", 2.0}, {"points", 3}}},
                            {"Down2", {{"cap", 10.0}, {"points", 4}}},
                            {"Mid", {{"cap", 10.0}, {"points", 4}}}};
    j["metrics"]["k"] = 1;
    j["out_dir"] = out_dir;
    return j;
}

ExperimentConfig small_config(const std::string& out_dir) {
    return config_from_json(small_config_json(out_dir));
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(f, line)) lines.push_back(line);
    return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

int count_files(const std::string& dir, const std::string& ext) {
    int n = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() == ext) ++n;
    }
    return n;
}

std::string file_bytes(const std::string& path) { return read_text_file(path); }

}  // namespace

TEST_CASE("gen: counts, determinism, and disabled hooks") {
    test::TempDir dir("gen");
    ExperimentConfig cfg = small_config(dir.str() + "/a");
    RunOptions opt;

    cmd_gen(cfg, opt);
    // 2 concepts x 3 seeds x 2 variants
    CHECK(count_files(cfg.out_dir + "/images", ".ppm") == 12);
    const auto lines = read_lines(cfg.out_dir + "/index.csv");
    CHECK(lines.size() == 13);  // header + 12 rows
    CHECK(lines[0] == "concept,seed,variant,file,aesthetic,alignment,usability");

    // Rerun into a second directory: byte-identical artifacts.
    ExperimentConfig cfg2 = small_config(dir.str() + "/b");
    cmd_gen(cfg2, opt);
    CHECK(file_bytes(cfg.out_dir + "/index.csv") == file_bytes(cfg2.out_dir + "/index.csv"));
    for (const auto& entry : fs::directory_iterator(cfg.out_dir + "/images")) {
        const std::string name = entry.path().filename().string();
        CHECK(file_bytes(entry.path().string()) ==
              file_bytes(cfg2.out_dir + "/images/" + name));
    }

    // Manifests differ only in the timestamp field.
    auto m1 = nlohmann::json::parse(file_bytes(cfg.out_dir + "/manifest.json"));
    auto m2 = nlohmann::json::parse(file_bytes(cfg2.out_dir + "/manifest.json"));
    CHECK(m1.at("config_hash") != m2.at("config_hash"));  // out_dir differs
    m1.erase("timestamp");
    m2.erase("timestamp");
    m1.erase("config_hash");
    m2.erase("config_hash");
    CHECK(m1 == m2);

    // Hook mode None: both variants are the same generation.
    nlohmann::json j = small_config_json(dir.str() + "/none");
    j["hooks"]["mode"] = "None";
    cmd_gen(config_from_json(j), opt);
    CHECK(file_bytes(dir.str() + "/none/images/chair_0_base.ppm") ==
          file_bytes(dir.str() + "/none/images/chair_0_none.ppm"));
}

TEST_CASE("gen: jobs do not change outputs") {
    test::TempDir dir("jobs");
    ExperimentConfig cfg1 = small_config(dir.str() + "/j1");
    ExperimentConfig cfg8 = small_config(dir.str() + "/j8");
    RunOptions opt1, opt8;
    opt1.jobs = 1;
    opt8.jobs = 8;
    cmd_gen(cfg1, opt1);
    cmd_gen(cfg8, opt8);
    CHECK(file_bytes(cfg1.out_dir + "/index.csv") == file_bytes(cfg8.out_dir + "/index.csv"));
    for (const auto& entry : fs::directory_iterator(cfg1.out_dir + "/images")) {
        const std::string name = entry.path().filename().string();
        CHECK(file_bytes(entry.path().string()) == file_bytes(cfg8.out_dir + "/images/" + name));
    }
}

TEST_CASE("config hashing is canonical") {
    const nlohmann::json a = small_config_json("x");
    // Same semantics, different key insertion order.
    nlohmann::json b;
    std::vector<std::string> keys;
    for (auto it = a.begin(); it != a.end(); ++it) keys.push_back(it.key());
    for (auto it = keys.rbegin(); it != keys.rend(); ++it) b[*it] = a.at(*it);
    CHECK(config_hash(config_to_json(config_from_json(a))) ==
          config_hash(config_to_json(config_from_json(b))));

    nlohmann::json c = a;
    c["seeds"] = 4;
    CHECK(config_hash(config_to_json(config_from_json(a))) !=
          config_hash(config_to_json(config_from_json(c))));
}

TEST_CASE("presets set steps and the combination sum") {
    nlohmann::json j = small_config_json("x");
    apply_preset(j, "turbo");
    CHECK(j["sampler"]["steps"] == 1);
    CHECK(j["combination"]["target_sum"] == 1.0);
    apply_preset(j, "sdxl");
    CHECK(j["sampler"]["steps"] == 25);
    CHECK(j["combination"]["target_sum"] == 0.6);
    apply_preset(j, "lightning4");
    CHECK(j["sampler"]["steps"] == 4);
    CHECK_THROWS_AS(apply_preset(j, "mega"), ConfigError);

    // Unset sum resolves by step count.
    nlohmann::json d = small_config_json("x");
    d["sampler"]["steps"] = 1;
    CHECK(config_from_json(d).resolved_target_sum() == 1.0);
    d["sampler"]["steps"] = 25;
    CHECK(config_from_json(d).resolved_target_sum() == 0.6);
}

TEST_CASE("--set overrides parse json values and dotted paths") {
    nlohmann::json j = small_config_json("x");
    apply_set_override(j, "sampler.steps=9");
    CHECK(j["sampler"]["steps"] == 9);
    apply_set_override(j, "hooks.c3_profile.Down0.lambda=1.9");
    CHECK(j["hooks"]["c3_profile"]["Down0"]["lambda"] == 1.9);
    apply_set_override(j, "concepts=[\"lamp\"]");
    CHECK(j["concepts"] == nlohmann::json::array({"lamp"}));
    apply_set_override(j, "modifier=rare");
    CHECK(j["modifier"] == "rare");
    CHECK_THROWS_AS(apply_set_override(j, "no_equals_sign"), ConfigError);
}

TEST_CASE("ablate-blocks: rows cover every block and identity rows are null effects") {
    test::TempDir dir("blocks");
    ExperimentConfig cfg = small_config(dir.str());
    cfg.concepts = {"chair"};
    cfg.seeds = 2;
    RunOptions opt;
    opt.jobs = 4;
    cmd_ablate_blocks(cfg, opt);

    const auto lines = read_lines(cfg.out_dir + "/ablate_blocks.csv");
    // 4 catalyst blocks with their grids (3/3/4/4) + 3 up blocks on the
    // fallback 5-point grid, times 2 seeds, plus the header.
    const int expected_rows = (3 + 3 + 4 + 4 + 5 * 3) * 2;
    CHECK(static_cast<int>(lines.size()) == expected_rows + 1);

    int identity_rows = 0;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto cells = split_csv(lines[i]);
        REQUIRE(cells.size() == 6);
        if (cells[1] == "1") {
            ++identity_rows;
            CHECK(std::stod(cells[4]) < 1e-4);  // distance
        }
    }
    CHECK(identity_rows == 7 * 2);
}

TEST_CASE("ablate-frequency: variants and identity case") {
    test::TempDir dir("freq");
    nlohmann::json j = small_config_json(dir.str());
    j["params"] = {{"lambda", 1.0}, {"rho_low", 0.25}};
    j["seeds"] = 2;
    cmd_ablate_frequency(config_from_json(j), RunOptions{});

    const auto lines = read_lines(dir.str() + "/ablate_frequency.csv");
    CHECK(lines.size() == 1 + 2 * 2);
    std::map<std::string, std::vector<double>> hbe_by_variant;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto cells = split_csv(lines[i]);
        REQUIRE(cells.size() == 4);
        CHECK((cells[1] == "allband" || cells[1] == "lowband"));
        hbe_by_variant[cells[1]].push_back(std::stod(cells[2]));
    }
    REQUIRE(hbe_by_variant["allband"].size() == 2);
    REQUIRE(hbe_by_variant["lowband"].size() == 2);
    // lambda = 1: both variants are the identity, so the hbe values agree.
    for (int s = 0; s < 2; ++s) {
        CHECK(hbe_by_variant["allband"][s] ==
              doctest::Approx(hbe_by_variant["lowband"][s]).epsilon(1e-3));
    }
}

TEST_CASE("select: bounds, determinism, and summary shape") {
    test::TempDir dir("select");
    ExperimentConfig cfg = small_config(dir.str() + "/a");
    cfg.concepts = {"chair"};
    RunOptions opt;
    opt.jobs = 4;
    cmd_select(cfg, opt);

    for (BlockId b : kCatalystBlocks) {
        const auto j = nlohmann::json::parse(
            file_bytes(cfg.out_dir + "/selections/selection_" + to_string(b) + ".json"));
        const BlockSelection sel = selection_from_json(j);
        const double cap = cfg.search.grids.at(b).cap();
        CHECK(sel.lambda_star >= 1.0);
        CHECK(sel.lambda_star <= cap);
    }
    const auto lines = read_lines(cfg.out_dir + "/selection_summary.csv");
    CHECK(lines.size() == 5);
    CHECK(lines[0] == "block,cap,lambda_star,baseline_use,threshold");

    ExperimentConfig cfg2 = small_config(dir.str() + "/b");
    cfg2.concepts = {"chair"};
    cmd_select(cfg2, opt);
    for (BlockId b : kCatalystBlocks) {
        CHECK(file_bytes(cfg.out_dir + "/selections/selection_" + to_string(b) + ".json") ==
              file_bytes(cfg2.out_dir + "/selections/selection_" + to_string(b) + ".json"));
    }
}

TEST_CASE("combine: profile budget and single-block no-op") {
    test::TempDir dir("combine");
    // Hand-written selections avoid a full select run.
    const std::string sel_dir = dir.str() + "/selections";
    ensure_directory(sel_dir);
    for (const auto& [name, lambda] : std::map<std::string, double>{
             {"Down0", 1.5}, {"Down1", 2.0}, {"Down2", 4.0}, {"Mid", 7.0}}) {
        BlockSelection sel;
        sel.block = block_from_string(name);
        sel.lambda_star = lambda;
        sel.trace = {{1.0, 10.0, true}, {lambda, 9.0, true}};
        write_text_file(sel_dir + "/selection_" + name + ".json",
                        selection_to_json(sel).dump(2));
    }

    nlohmann::json j = small_config_json(dir.str());
    j["params"]["selections_dir"] = sel_dir;
    j["combination"]["target_sum"] = 0.6;
    j["seeds"] = 2;
    cmd_combine(config_from_json(j), RunOptions{});

    const auto profile = nlohmann::json::parse(file_bytes(dir.str() + "/profile.json"));
    CHECK(profile.at("target_sum") == 0.6);
    double ssum = 0.0;
    for (const auto& [name, jb] : profile.at("blocks").items()) {
        ssum += jb.at("s").get<double>();
        CHECK(jb.at("lambda").get<double>() >= 1.0);
    }
    CHECK(std::abs(ssum - 0.6) < 1e-12);
    CHECK(count_files(dir.str() + "/images", ".ppm") == 2);

    // Single selection with the full budget: combined images equal the
    // single-block lambda* generation.
    test::TempDir dir2("combine1");
    const std::string sel1 = dir2.str() + "/selections";
    ensure_directory(sel1);
    BlockSelection only;
    only.block = BlockId::Down2;
    only.lambda_star = 4.0;
    only.trace = {{1.0, 10.0, true}, {4.0, 9.5, true}};
    write_text_file(sel1 + "/selection_Down2.json", selection_to_json(only).dump(2));

    nlohmann::json j2 = small_config_json(dir2.str());
    j2["params"]["selections_dir"] = sel1;
    j2["combination"]["target_sum"] = 1.0;
    j2["seeds"] = 1;
    const ExperimentConfig cfg2 = config_from_json(j2);
    cmd_combine(cfg2, RunOptions{});

    const DenoiserModel model = build_model(cfg2.model);
    HookSet single;
    single.mode = HookMode::C3;
    single.c3_profile[BlockId::Down2] = {4.0, 0.25};
    const Image direct =
        sample(model, cfg2.sampler, cfg2.conditioning("chair"), 0, single).image;
    const Image combined = read_ppm(dir2.str() + "/images/combined_s0.ppm");
    CHECK(test::max_abs_diff(direct, combined) < 2.0 / 255.0);  // PPM quantization
}

TEST_CASE("combine without selections is a config error") {
    test::TempDir dir("combine_missing");
    CHECK_THROWS_AS(cmd_combine(small_config(dir.str()), RunOptions{}), ConfigError);
}

TEST_CASE("quant: identity profile degenerates, schema is stable") {
    test::TempDir dir("quant");
    nlohmann::json j = small_config_json(dir.str());
    j["seeds"] = 4;
    j["metrics"]["k"] = 1;
    // Identity amplification: the amplified set is the plain set.
    j["hooks"]["c3_profile"] = {{"Down0", {{"lambda", 1.0}, {"rho", 0.25}}}};
    j["ref_concepts"] = {{"chair", "sofa"}};
    cmd_quant(config_from_json(j), RunOptions{});

    const auto lines = read_lines(dir.str() + "/quant.csv");
    CHECK(lines[0] ==
          "concept,n_real,n_fake,k,fid_star,precision_star,recall,lpips_mean,vendi,"
          "alignment_mean,ref_fid_star");
    REQUIRE(lines.size() == 1 + 2 + 2);  // concepts + mean + std
    const auto chair = split_csv(lines[1]);
    CHECK(chair[0] == "chair");
    CHECK(std::stod(chair[4]) < 1e-6);   // fid_star ~ 0
    CHECK(std::stod(chair[5]) == 1.0);   // precision
    CHECK(std::stod(chair[6]) == 1.0);   // recall
    CHECK(chair[10] != "");              // ref band present for chair
    const auto car = split_csv(lines[2]);
    CHECK(car[10] == "");                // no ref concept for car

    const auto report =
        nlohmann::json::parse(file_bytes(dir.str() + "/reports/chair.json"));
    CHECK(report.contains("blip"));
    CHECK(report.at("blip").is_null());
    CHECK(MetricsReport::from_json(report).n_fake == 4);

    CHECK(split_csv(lines[3])[0] == "mean");
    CHECK(split_csv(lines[4])[0] == "std");

    // Too few seeds for the neighborhood size.
    nlohmann::json bad = small_config_json(dir.str() + "/bad");
    bad["seeds"] = 2;
    bad["metrics"]["k"] = 1;
    CHECK_THROWS_AS(cmd_quant(config_from_json(bad), RunOptions{}), ConfigError);
}

TEST_CASE("sweep: cutoff identity and unknown parameters") {
    test::TempDir dir("sweep");
    nlohmann::json j = small_config_json(dir.str());
    j["seeds"] = 2;
    // lambda = 1 profile: every cutoff is an identity.
    j["hooks"]["c3_profile"] = {{"Down0", {{"lambda", 1.0}, {"rho", 0.25}}}};
    j["params"] = {{"param", "cutoff"}, {"values", {0.0, 0.25, 0.5, 1.0}}};
    RunOptions opt;
    opt.svg = true;
    cmd_sweep(config_from_json(j), opt);

    const auto lines = read_lines(dir.str() + "/sweep.csv");
    CHECK(lines.size() == 1 + 4 * 2);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto cells = split_csv(lines[i]);
        CHECK(std::stod(cells[5]) < 1e-4);  // distance
    }
    CHECK(fs::exists(dir.str() + "/sweep.svg"));

    nlohmann::json bad = small_config_json(dir.str() + "/bad");
    bad["params"] = {{"param", "nonsense"}};
    CHECK_THROWS_AS(cmd_sweep(config_from_json(bad), RunOptions{}), ConfigError);
}

TEST_CASE("sweep: epsilon series yields non-increasing factors") {
    test::TempDir dir("sweep_eps");
    nlohmann::json j = small_config_json(dir.str());
    j["seeds"] = 1;
    j["search"]["seeds_per_point"] = 2;
    j["params"] = {{"param", "epsilon"}, {"values", {0.5, 0.7, 0.9}}, {"block", "Down2"}};
    cmd_sweep(config_from_json(j), RunOptions{});

    const auto lines = read_lines(dir.str() + "/sweep.csv");
    std::vector<double> stars;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto cells = split_csv(lines[i]);
        if (cells[2] == "0") stars.push_back(std::stod(cells[3]));
    }
    REQUIRE(stars.size() == 3);
    CHECK(stars[0] >= stars[1]);
    CHECK(stars[1] >= stars[2]);
}

TEST_CASE("sweep: step_range values label rows") {
    test::TempDir dir("sweep_sr");
    nlohmann::json j = small_config_json(dir.str());
    j["seeds"] = 1;
    j["params"] = {{"param", "step_range"}, {"values", {{0, 0}, {0, 1}, {1, 1}}}};
    cmd_sweep(config_from_json(j), RunOptions{});
    const auto lines = read_lines(dir.str() + "/sweep.csv");
    REQUIRE(lines.size() == 4);
    CHECK(split_csv(lines[1])[1] == "0:0");
    CHECK(split_csv(lines[2])[1] == "0:1");
    CHECK(split_csv(lines[3])[1] == "1:1");
}

TEST_CASE("ablate-modifier: four cells per concept") {
    test::TempDir dir("mod");
    nlohmann::json j = small_config_json(dir.str());
    j["concepts"] = {"chair"};
    j["seeds"] = 3;
    cmd_ablate_modifier(config_from_json(j), RunOptions{});

    const auto lines = read_lines(dir.str() + "/ablate_modifier.csv");
    CHECK(lines[0] == "concept,fid_on_off_with_modifier,fid_on_off_without_modifier");
    REQUIRE(lines.size() == 2);
    const auto cells = split_csv(lines[1]);
    CHECK(std::stod(cells[1]) >= 0.0);
    CHECK(std::stod(cells[2]) >= 0.0);
    // 2 modifier conditions x 2 hook states x 3 seeds
    CHECK(count_files(dir.str() + "/images", ".ppm") == 12);
    // Distinct cells: modifier presence changes the off images.
    CHECK(file_bytes(dir.str() + "/images/chair_mod_off_s0.ppm") !=
          file_bytes(dir.str() + "/images/chair_nomod_off_s0.ppm"));
}

TEST_CASE("freeu-compare: grid rows plus the reference row") {
    test::TempDir dir("freeu");
    nlohmann::json j = small_config_json(dir.str());
    j["seeds"] = 2;
    j["params"] = {{"b_grid", {1.0, 1.2}}, {"s_grid", {0.5, 1.0}}};
    cmd_freeu_compare(config_from_json(j), RunOptions{});

    const auto lines = read_lines(dir.str() + "/freeu_compare.csv");
    CHECK(lines.size() == 1 + 2 * 2 * 2 + 2);
    int identity_rows = 0;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto cells = split_csv(lines[i]);
        REQUIRE(cells.size() == 7);
        if (cells[0] == "freeu" && cells[1] == "1" && cells[2] == "1") {
            ++identity_rows;
            CHECK(std::stod(cells[5]) < 1e-4);  // matches the baseline
        }
    }
    CHECK(identity_rows == 2);
}

TEST_CASE("template-sweep: the four templates in order") {
    test::TempDir dir("tmpl");
    nlohmann::json j = small_config_json(dir.str());
    j["seeds"] = 2;
    cmd_template_sweep(config_from_json(j), RunOptions{});

    const auto summary = read_lines(dir.str() + "/template_summary.csv");
    REQUIRE(summary.size() == 5);
    CHECK(split_csv(summary[1])[0] == "creative");
    CHECK(split_csv(summary[2])[0] == "rare");
    CHECK(split_csv(summary[3])[0] == "innovative");
    CHECK(split_csv(summary[4])[0] == "ingenious");

    const auto rows = read_lines(dir.str() + "/template_rows.csv");
    CHECK(rows.size() == 1 + 4 * 2);
    CHECK(count_files(dir.str() + "/images", ".ppm") == 8);

    // Distinct modifiers produce distinct images.
    CHECK(file_bytes(dir.str() + "/images/creative_s0.ppm") !=
          file_bytes(dir.str() + "/images/rare_s0.ppm"));
}

TEST_CASE("manifest lists every artifact") {
    test::TempDir dir("manifest");
    ExperimentConfig cfg = small_config(dir.str());
    cfg.concepts = {"chair"};
    cfg.seeds = 1;
    cmd_gen(cfg, RunOptions{});
    const auto manifest = nlohmann::json::parse(file_bytes(dir.str() + "/manifest.json"));
    CHECK(manifest.at("command") == "gen");
    CHECK(manifest.at("tool_version") == tool_version());
    for (const auto& rel : manifest.at("files")) {
        CHECK(fs::exists(dir.str() + "/" + rel.get<std::string>()));
    }
}

TEST_CASE("cli binary: exit codes and env override") {
    const char* bin = std::getenv("C3_BIN");
    REQUIRE(bin != nullptr);
    test::TempDir dir("cli");

    const std::string cfg_path = dir.str() + "/cfg.json";
    nlohmann::json j = small_config_json(dir.str() + "/out");
    j["concepts"] = {"chair"};
    j["seeds"] = 1;
    write_text_file(cfg_path, j.dump());

    const std::string base = std::string(bin) + " gen --config " + cfg_path;
    CHECK(std::system((base + " > /dev/null 2>&1").c_str()) == 0);
    CHECK(fs::exists(dir.str() + "/out/manifest.json"));

    // Unreadable config -> exit 4 is for output i/o; a bad config file is 2.
    const std::string bad_cfg = dir.str() + "/bad.json";
    write_text_file(bad_cfg, "{not json");
    int rc = std::system(
        (std::string(bin) + " gen --config " + bad_cfg + " > /dev/null 2>&1").c_str());
    CHECK(WEXITSTATUS(rc) == 2);

    // Unknown sweep param via --set -> config error exit code.
    rc = std::system((std::string(bin) + " sweep --config " + cfg_path +
                      " --set params.param=bogus > /dev/null 2>&1")
                         .c_str());
    CHECK(WEXITSTATUS(rc) == 2);

    // Remote scorer, endpoint injected via the environment, nothing
    // listening there -> exit 3.
    rc = std::system(("C3_SCORER_ENDPOINT=http://127.0.0.1:1 " + std::string(bin) +
                      " gen --config " + cfg_path +
                      " --set scorer.source=remote --set scorer.fallback_to_proxy=false" +
                      " --set scorer.retries=0 --set scorer.timeout_ms=200" +
                      " --set out_dir=\"" + dir.str() + "/out3\"" + " > /dev/null 2>&1")
                         .c_str());
    CHECK(WEXITSTATUS(rc) == 3);
}
