#pragma once

#include <map>
#include <string>
#include <vector>

#include "kbl/datum.hpp"
#include "kbl/dispersive.hpp"
#include "kbl/flux.hpp"
#include "kbl/types.hpp"

namespace kbl {

// Exit-code contract shared by the CLI verbs.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;     // schema / compatibility / inputs
inline constexpr int kExitSolver = 3;     // divergence or non-convergence
inline constexpr int kExitThreshold = 4;  // eps^2 energy guard tripped

struct GridSpec {
    double L = 0.0;
    Index N = 0;
    double dt = 0.0;
    double T = 0.0;
    // When > 0, each sweep member refines so the spacing resolves the layer:
    // member N = max(N, ceil(points_per_eps * L / eps)), dt scaled down
    // proportionally.
    double points_per_eps = 0.0;
};

struct GateSpec {
    double slope = 2.7;             // log-log scaling gate
    double self_convergence = 0.10; // relative sup-energy change on halving
};

struct RunConfig {
    int spec_version = 0;
    std::string flux_name;
    std::map<std::string, double> flux_params;
    SmoothFn u_in;
    SmoothFn u_b;
    std::vector<double> eps_list;
    double nu = 0.0;
    GridSpec grid;
    GateSpec gates;
    Index snapshots = 0;  // snapshot CSV count per run, 0 disables dumps
    double w_bound = 0.5;
    double threshold_factor = 1.0;
    double layer_dy = 0.01;
    std::string scheme = "imex-dispersion";
};

/// Parses and schema-validates a JSON config (spec_version 1). Throws
/// ArgumentError on any violation, including T beyond the estimated
/// lifespan and unknown registry names.
RunConfig load_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);

/// Solver configuration of one sweep member; `halved` doubles N and halves
/// dt for the self-convergence companion run.
SolverConfig member_config(const RunConfig& cfg, double eps, bool halved);

/// Compatibility + schema validation only; prints one line per corner
/// condition. Returns kExitOk or kExitConfig.
int validate_config(const RunConfig& cfg);

/// Single run at one eps: writes energy_report.json and optional
/// snapshots/*.csv under outdir.
int run_single(const RunConfig& cfg, double eps, const std::string& outdir,
               bool force);

/// Full eps sweep with per-member self-convergence; writes
/// scaling_fit.json, sweep_table.csv, and per-member energy reports.
/// Exit kExitOk iff the fitted slope passes the gate.
int run_sweep(const RunConfig& cfg, const std::string& outdir, bool force,
              int threads);

/// Summarizes artifacts previously written to outdir, as text or JSON.
int emit_report(const std::string& outdir, bool as_json);

}  // namespace kbl
