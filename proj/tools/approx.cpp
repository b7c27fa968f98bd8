// Command-line front end: run experiment configs, emit presets, validate.
//
// Exit codes: 0 success, 2 config error, 3 numerical failure.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "approx/experiment.hpp"

namespace {

std::string output_root(const std::string& cli_value) {
    if (!cli_value.empty()) return cli_value;
    if (const char* env = std::getenv("APPROX_OUTPUT_ROOT")) return env;
    return ".";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse polynomial approximation from Monte Carlo samples"};
    app.require_subcommand(1);

    std::string config_path, out_root_flag, preset_dir = ".";
    int jobs = 0;
    std::vector<std::string> overrides;

    auto* run = app.add_subcommand("run", "Run an experiment config");
    run->add_option("config", config_path, "config file")->required();
    run->add_option("--out", out_root_flag, "output root (default $APPROX_OUTPUT_ROOT or .)");
    run->add_option("--jobs", jobs, "parallel trials");
    run->add_option("--set", overrides, "override a key, e.g. --set trials=2")->take_all();

    auto* presets = app.add_subcommand("presets", "Write the built-in experiment configs");
    presets->add_option("--dir", preset_dir, "directory to write the preset files into");

    auto* validate = app.add_subcommand("validate", "Parse and check a config");
    validate->add_option("config", config_path, "config file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (presets->parsed()) {
            std::filesystem::create_directories(preset_dir);
            for (const auto& name : approx::preset_names()) {
                const auto path = std::filesystem::path(preset_dir) / (name + ".cfg");
                std::ofstream out(path);
                out << approx::preset_text(name);
                std::cout << path.string() << "\n";
            }
            return 0;
        }

        auto cfg = approx::ExperimentConfig::parse_file(config_path);
        for (const auto& ov : overrides) {
            const auto eq = ov.find('=');
            if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value");
            // re-parse with the extra line appended; later keys win
            cfg = approx::ExperimentConfig::parse_text(cfg.serialize() + ov.substr(0, eq) + " = " +
                                                       ov.substr(eq + 1) + "\n");
        }
        cfg.validate();

        if (validate->parsed()) {
            std::cout << "ok: " << cfg.id << " (" << cfg.function << ", " << cfg.kind << ")\n";
            return 0;
        }

        const auto outcome = approx::run_experiment(cfg, output_root(out_root_flag), jobs, &std::cout);
        std::cout << "wrote " << outcome.directory << "\n";
        if (outcome.cardinality_mismatch)
            std::cout << "warning: enumerated index-set cardinality differs from the configured "
                         "N/N_caption; see manifest.txt\n";
        if (outcome.failed_trials > 0) {
            std::cerr << outcome.failed_trials << "/" << outcome.total_trials
                      << " trials failed numerically\n";
            return 3;
        }
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}
