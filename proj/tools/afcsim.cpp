// Command-line entry point. Exit status: 0 success, 1 configuration error,
// 2 runtime error (I/O, malformed timestamp file, failed analysis).
#include <iostream>

#include "CLI11.hpp"
#include "afcsim/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Heralded single-photon storage simulator and coincidence analyzer"};
    std::string config_path;
    afcsim::Overrides overrides;
    std::string mode;
    std::string format;
    std::string out;
    std::string input;
    std::uint64_t seed = 0;
    double tau_ns = 0.0;
    double pump_mw = 0.0;

    app.add_option("--config", config_path, "Scenario configuration file")->required();
    auto* mode_opt = app.add_option("--mode", mode, "simulate | analyze | simulate+analyze | sweep");
    auto* seed_opt = app.add_option("--seed", seed, "Master random seed");
    auto* out_opt = app.add_option("--out", out, "Output directory");
    auto* format_opt = app.add_option("--format", format, "Timestamp file format")
                           ->check(CLI::IsMember({"csv", "binary"}));
    auto* input_opt = app.add_option("--input", input, "Timestamp file to analyze");
    app.add_flag("--no-filter-cavity", overrides.no_filter_cavity, "Remove the idler filter cavity's selectivity");
    auto* tau_opt = app.add_option("--tau", tau_ns, "Storage time in ns");
    auto* pump_opt = app.add_option("--pump-mw", pump_mw, "Pump power in mW");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    if (*mode_opt) overrides.mode = mode;
    if (*seed_opt) overrides.seed = seed;
    if (*out_opt) overrides.out_dir = out;
    if (*format_opt) overrides.format = format;
    if (*input_opt) overrides.input = input;
    if (*tau_opt) overrides.tau_ns = tau_ns;
    if (*pump_opt) overrides.pump_mw = pump_mw;

    afcsim::Scenario scenario;
    try {
        scenario = afcsim::load_scenario(config_path, overrides);
    } catch (const afcsim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    }

    try {
        const auto result = afcsim::run_scenario(scenario);
        for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
        std::cout << scenario.name << ": " << afcsim::to_string(scenario.mode) << " wrote " << result.files.size()
                  << " files to " << scenario.out_dir.string() << '\n';
    } catch (const afcsim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
