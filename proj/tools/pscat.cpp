// Scenario-driven batch front end: validates configs, runs the scattering
// pipelines and writes plot-ready tables.

#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "pscat/runner.hpp"
#include "pscat/version.hpp"

int main(int argc, char** argv) {
    CLI::App app{"wave-packet scattering observables"};
    app.set_version_flag("--version", std::string(pscat::version));

    int threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
    app.add_option("--threads", threads, "worker threads (default: all cores)");

    std::string run_config, run_out;
    auto* run_cmd = app.add_subcommand("run", "run a scenario config");
    run_cmd->add_option("config", run_config, "JSON scenario config")->required();
    run_cmd->add_option("--out", run_out, "output directory")->required();

    std::string val_config;
    auto* val_cmd = app.add_subcommand("validate", "schema-check a config without computing");
    val_cmd->add_option("config", val_config, "JSON scenario config")->required();

    app.require_subcommand(0, 1);
    CLI11_PARSE(app, argc, argv);

    if (*run_cmd) {
        pscat::RunOptions opts;
        opts.threads = threads;
        return pscat::run(run_config, run_out, opts);
    }
    if (*val_cmd) {
        const auto violations = pscat::validate(val_config);
        for (const auto& v : violations) std::cerr << v << "\n";
        return violations.empty() ? 0 : 1;
    }
    std::cerr << app.help();
    return 1;
}
