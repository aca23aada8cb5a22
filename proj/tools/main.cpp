#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "twophase/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Two-phase Hessian energy: minimize, check the optimality system, estimate regularity."};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run the pipeline described by a config file");
    std::string config_path;
    twophase::RunOverrides ov;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::string output;
    run->add_option("config", config_path, "config file (key = value)")->required();
    run->add_flag("--strict", ov.strict, "exit 4 when any estimate verdict is unstable");
    auto* seed_opt = run->add_option("--seed", seed, "override solver.seed");
    auto* threads_opt = run->add_option("--threads", threads, "worker threads (default: hardware)")->check(CLI::Range(1u, 1024u));
    auto* output_opt = run->add_option("--output", output, "output directory (default: output.dir, then $TWOPHASE_OUTPUT_DIR)");

    auto* plot = app.add_subcommand("plot", "write long-format plot CSVs from a finished run directory");
    std::string run_dir;
    plot->add_option("run_dir", run_dir, "run output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : twophase::kExitValidation;
    }

    if (*run) {
        if (*seed_opt) ov.seed = seed;
        if (*threads_opt) ov.threads = threads;
        if (*output_opt) ov.output_dir = output;
        const twophase::RunOutcome res = twophase::run(config_path, ov);
        if (res.exit_code != twophase::kExitOk) std::cerr << res.message << '\n';
        else std::cout << "wrote " << res.output_dir << '\n';
        return res.exit_code;
    }
    std::string message;
    const int code = twophase::emit_plot_data(run_dir, &message);
    if (code != twophase::kExitOk) std::cerr << message << '\n';
    return code;
}
