#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "kbl/harness.hpp"

int main(int argc, char** argv) {
    CLI::App app{
        "Dispersive boundary-layer simulator for KdV-type equations on the "
        "half-line: runs, eps sweeps, and verification reports"};
    app.require_subcommand(1);

    std::string config_path;
    std::string outdir = "out";
    bool force = false;
    bool as_json = false;
    int threads = 1;
    double eps_override = 0.0;

    CLI::App* run = app.add_subcommand(
        "run", "integrate the remainder at a single eps");
    run->add_option("--config", config_path, "JSON run configuration")
        ->required();
    run->add_option("--out", outdir, "output directory");
    run->add_option("--eps", eps_override,
                    "eps to run (default: first entry of eps_list)");
    run->add_flag("--force", force,
                  "run even if compatibility conditions fail");

    CLI::App* sweep = app.add_subcommand(
        "sweep", "eps sweep with self-convergence and a scaling fit");
    sweep->add_option("--config", config_path, "JSON run configuration")
        ->required();
    sweep->add_option("--out", outdir, "output directory");
    sweep->add_option("--threads", threads, "concurrent sweep members");
    sweep->add_flag("--force", force,
                    "run even if compatibility conditions fail");

    CLI::App* report =
        app.add_subcommand("report", "summarize previously written artifacts");
    report->add_option("--out", outdir, "directory holding the artifacts");
    report->add_flag("--json", as_json, "machine-readable output");

    CLI::App* validate = app.add_subcommand(
        "validate", "schema and compatibility checks only");
    validate->add_option("--config", config_path, "JSON run configuration")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (report->parsed()) return kbl::emit_report(outdir, as_json);

        kbl::RunConfig cfg = kbl::load_config(config_path);
        if (validate->parsed()) return kbl::validate_config(cfg);
        if (run->parsed()) {
            const double eps =
                eps_override > 0.0 ? eps_override : cfg.eps_list.front();
            return kbl::run_single(cfg, eps, outdir, force);
        }
        return kbl::run_sweep(cfg, outdir, force, threads);
    } catch (const kbl::ArgumentError& e) {
        std::cerr << e.what() << "\n";
        return kbl::kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return kbl::kExitConfig;
    }
}
