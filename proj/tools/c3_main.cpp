#include <cstdlib>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "c3/experiments.hpp"
#include "c3/io.hpp"

namespace {

using CommandFn = void (*)(const c3::ExperimentConfig&, const c3::RunOptions&);

const std::map<std::string, CommandFn> kCommands = {
    {"gen", c3::cmd_gen},
    {"ablate-blocks", c3::cmd_ablate_blocks},
    {"ablate-frequency", c3::cmd_ablate_frequency},
    {"select", c3::cmd_select},
    {"combine", c3::cmd_combine},
    {"quant", c3::cmd_quant},
    {"sweep", c3::cmd_sweep},
    {"ablate-modifier", c3::cmd_ablate_modifier},
    {"freeu-compare", c3::cmd_freeu_compare},
    {"template-sweep", c3::cmd_template_sweep},
};

struct CliArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string preset;
    int jobs = 1;
    bool svg = false;
    bool dump_latents = false;
};

nlohmann::json build_config_json(const CliArgs& args) {
    nlohmann::json j = c3::default_config_json();
    if (!args.config_path.empty()) {
        nlohmann::json user =
            nlohmann::json::parse(c3::read_text_file(args.config_path), nullptr,
                                  /*allow_exceptions=*/false);
        if (user.is_discarded()) {
            throw c3::ConfigError("config file is not valid JSON: " + args.config_path);
        }
        c3::merge_config(j, user);
    }
    if (!args.preset.empty()) c3::apply_preset(j, args.preset);
    if (const char* env = std::getenv("C3_SCORER_ENDPOINT"); env && *env) {
        j["scorer"]["endpoint"] = env;
    }
    for (const std::string& kv : args.overrides) c3::apply_set_override(j, kv);
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"c3: frequency-domain low-band feature amplification experiments"};
    app.require_subcommand(1);

    CliArgs args;
    for (const auto& [name, fn] : kCommands) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", args.config_path, "experiment config JSON");
        sub->add_option("--set", args.overrides, "override config values (dotted.path=value)");
        sub->add_option("--preset", args.preset, "model-family preset: turbo|lightning4|sdxl");
        sub->add_option("--jobs", args.jobs, "seed-level worker threads")
            ->check(CLI::PositiveNumber);
        sub->add_flag("--svg", args.svg, "emit SVG line plots where supported");
        sub->add_flag("--dump-latents", args.dump_latents,
                      "also write final latents as tensor files");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        const nlohmann::json merged = build_config_json(args);
        const c3::ExperimentConfig cfg = c3::config_from_json(merged);
        c3::RunOptions opt;
        opt.jobs = args.jobs;
        opt.svg = args.svg;
        opt.dump_latents = args.dump_latents;
        kCommands.at(command)(cfg, opt);
        std::cout << command << ": wrote artifacts to " << cfg.out_dir << "\n";
        return static_cast<int>(c3::ExitCode::Ok);
    } catch (const c3::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return static_cast<int>(c3::ExitCode::Config);
    } catch (const c3::ScorerUnavailableError& e) {
        std::cerr << "scorer unavailable: " << e.what() << "\n";
        return static_cast<int>(c3::ExitCode::ScorerUnavailable);
    } catch (const c3::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return static_cast<int>(c3::ExitCode::Io);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(c3::ExitCode::Internal);
    }
}
