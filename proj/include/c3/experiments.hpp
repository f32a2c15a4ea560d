#pragma once

#include <string>

#include "c3/config.hpp"

namespace c3 {

struct RunOptions {
    int jobs = 1;
    bool svg = false;
    bool dump_latents = false;
};

/// Per-command artifact index, written as manifest.json in the output
/// directory. Reruns with the same config differ only in the timestamp.
struct RunManifest {
    std::string command;
    std::string config_hash;
    std::string tool_version;
    std::string timestamp;
    std::vector<std::string> files;
};

// Each command writes images / CSV / JSON artifacts plus a manifest under
// cfg.out_dir, and throws (ConfigError, IoError, ScorerUnavailableError, ...)
// on failure. The CLI maps exception types to exit codes.
void cmd_gen(const ExperimentConfig& cfg, const RunOptions& opt);
void cmd_ablate_blocks(const ExperimentConfig& cfg, const RunOptions& opt);
void cmd_ablate_frequency(const ExperimentConfig& cfg, const RunOptions& opt);
void cmd_select(const ExperimentConfig& cfg, const RunOptions& opt);
void cmd_combine(const ExperimentConfig& cfg, const RunOptions& opt);
void cmd_quant(const ExperimentConfig& cfg, const RunOptions& opt);
void cmd_sweep(const ExperimentConfig& cfg, const RunOptions& opt);
void cmd_ablate_modifier(const ExperimentConfig& cfg, const RunOptions& opt);
void cmd_freeu_compare(const ExperimentConfig& cfg, const RunOptions& opt);
void cmd_template_sweep(const ExperimentConfig& cfg, const RunOptions& opt);

const char* tool_version();

}  // namespace c3
