// Command-line experiment runner: `gent run --config cfg.json [--seed N]
// [--out DIR]` executes one experiment and writes a CSV table plus a JSON
// summary; `gent list` prints the registry with parameter schemas. The exit
// code is zero only when every assertion of the experiment passes.

#include "gent/experiments.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

namespace gx = gent::experiments;

namespace {

int do_list() {
    for (const auto& info : gx::registry()) {
        std::cout << info.name << "\n  " << info.description << "\n";
        for (const auto& [key, spec] : info.schema) {
            std::cout << "    " << key << " (" << spec.type
                      << ", default " << spec.default_value.dump() << "): " << spec.description
                      << "\n";
        }
        std::cout << "\n";
    }
    std::cout << gx::registry().size() << " experiments registered\n";
    return 0;
}

int do_run(const std::string& config_path, bool seed_given, std::uint64_t seed_override,
           const std::string& out_override) {
    std::ifstream in(config_path);
    if (!in) {
        std::cerr << "error: cannot open config file '" << config_path << "'\n";
        return 2;
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: config is not valid JSON: " << e.what() << "\n";
        return 2;
    }

    gx::ExperimentConfig cfg = gx::parse_config(doc);
    if (seed_given) cfg.seed = seed_override;
    if (!out_override.empty()) cfg.output_path = out_override;

    gx::ResultBundle bundle = gx::run(cfg);
    gx::write_outputs(bundle, cfg.output_path);

    for (const auto& a : bundle.assertions)
        std::cout << (a.pass ? "PASS" : "FAIL") << "  " << a.name << "  value=" << a.value
                  << " limit=" << a.limit << "\n";
    std::cout << (bundle.all_passed() ? "OK" : "FAILED") << "  " << cfg.experiment << "  ("
              << bundle.rows.size() << " rows, " << bundle.wall_time_seconds << " s)\n";
    return bundle.all_passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spin-chain entanglement and channel experiments"};
    app.require_subcommand(1);

    auto* list_cmd = app.add_subcommand("list", "Show the experiment registry");

    std::string config_path, out_override;
    std::uint64_t seed_override = 0;
    auto* run_cmd = app.add_subcommand("run", "Run one experiment from a JSON config");
    run_cmd->add_option("--config", config_path, "JSON config file")->required();
    auto* seed_opt = run_cmd->add_option("--seed", seed_override, "Override the config seed");
    run_cmd->add_option("--out", out_override, "Override the output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (list_cmd->parsed()) return do_list();
        return do_run(config_path, seed_opt->count() > 0, seed_override, out_override);
    } catch (const gent::ConfigInvalid& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
