// Experiment runner CLI. Exit codes: 0 success, 1 runtime failure,
// 2 config rejection (message names the offending field).
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <string>

#include "adamflow/errors.hpp"
#include "adamflow/experiment.hpp"

namespace {

int usage(std::FILE* to) {
    std::fputs(
        "usage:\n"
        "  adamflow run <config.json> [--out DIR] [--seed S] [--threads K]\n"
        "  adamflow validate <config.json>\n"
        "  adamflow list-kinds\n"
        "\n"
        "Environment overrides: OUT_DIR, ROOT_SEED (command line wins).\n",
        to);
    return to == stdout ? 0 : 2;
}

int run(int argc, char** argv) {
    if (argc < 1) return usage(stderr);
    const std::string config = argv[0];
    adamflow::ExperimentOptions opts;
    for (int i = 1; i < argc; ++i) {
        const std::string flag = argv[i];
        auto value = [&]() -> const char* {
            if (i + 1 >= argc) {
                std::fprintf(stderr, "error: %s needs a value\n", flag.c_str());
                return nullptr;
            }
            return argv[++i];
        };
        if (flag == "--out") {
            const char* v = value();
            if (!v) return 2;
            opts.out_dir = v;
        } else if (flag == "--seed") {
            const char* v = value();
            if (!v) return 2;
            try {
                opts.seed = std::stoull(v);
            } catch (const std::exception&) {
                std::fprintf(stderr, "error: --seed expects an integer, got '%s'\n", v);
                return 2;
            }
            opts.has_seed = true;
        } else if (flag == "--threads") {
            const char* v = value();
            if (!v) return 2;
            try {
                opts.threads = std::stoi(v);
            } catch (const std::exception&) {
                std::fprintf(stderr, "error: --threads expects an integer, got '%s'\n", v);
                return 2;
            }
            if (opts.threads < 1) {
                std::fprintf(stderr, "error: --threads must be at least 1\n");
                return 2;
            }
        } else {
            std::fprintf(stderr, "error: unknown flag '%s'\n", flag.c_str());
            return usage(stderr);
        }
    }

    const adamflow::ExperimentResult result = adamflow::run_experiment(config, opts);
    if (result.exit_code != 0) {
        std::fprintf(stderr, "error: %s\n", result.message.c_str());
        return result.exit_code;
    }
    for (const auto& [name, pass] : result.checks)
        std::printf("%s %s\n", pass ? "PASS" : "FAIL", name.c_str());
    std::printf("wrote %s\n", result.out_dir.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) return usage(stderr);
    const std::string cmd = argv[1];
    if (cmd == "--help" || cmd == "-h" || cmd == "help") return usage(stdout);
    if (cmd == "run") {
        if (argc < 3) return usage(stderr);
        return run(argc - 2, argv + 2);
    }
    if (cmd == "validate") {
        if (argc != 3) return usage(stderr);
        try {
            adamflow::validate_config(argv[2]);
        } catch (const adamflow::ConfigError& e) {
            std::fprintf(stderr, "error: %s\n", e.what());
            return 2;
        } catch (const std::exception& e) {
            std::fprintf(stderr, "error: %s\n", e.what());
            return 1;
        }
        std::printf("ok\n");
        return 0;
    }
    if (cmd == "list-kinds") {
        for (const std::string& kind : adamflow::list_experiment_kinds())
            std::printf("%s\n", kind.c_str());
        return 0;
    }
    std::fprintf(stderr, "error: unknown command '%s'\n", cmd.c_str());
    return usage(stderr);
}
