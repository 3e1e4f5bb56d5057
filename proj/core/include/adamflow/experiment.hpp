#ifndef ADAMFLOW_EXPERIMENT_HPP
#define ADAMFLOW_EXPERIMENT_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace adamflow {

// Config-driven experiment runner. Configs are JSON files with a top-level
// "kind" discriminator and "spec_version": 1; every kind writes its CSVs,
// a manifest.json (the only artifact allowed to carry timing), and a
// deterministic summary.json/summary.txt into the output directory.
//
// Seed/output resolution order: command-line option, then environment
// (ROOT_SEED / OUT_DIR), then the config file.
struct ExperimentOptions {
    std::string out_dir;  // empty = no override
    std::uint64_t seed = 0;
    bool has_seed = false;
    int threads = 1;
};

struct ExperimentResult {
    int exit_code = 0;  // 0 ok, 1 runtime failure, 2 config rejection
    std::string message;
    std::string out_dir;
    std::vector<std::pair<std::string, bool>> checks;  // summary lines
    bool all_passed() const {
        for (const auto& [name, ok] : checks)
            if (!ok) return false;
        return true;
    }
};

// Never throws: failures are reported through exit_code/message.
ExperimentResult run_experiment(const std::string& config_path, const ExperimentOptions& opts);

// Parses and schema-checks only. Throws ConfigError (or Error for I/O).
void validate_config(const std::string& config_path);

std::vector<std::string> list_experiment_kinds();

}  // namespace adamflow

#endif
