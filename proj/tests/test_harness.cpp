#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "kbl/harness.hpp"

using namespace kbl;
namespace fs = std::filesystem;

namespace {

std::string base_config(const std::string& extra = "") {
    return R"({
  "spec_version": 1,
  "flux": {"name": "quadratic"},
  "u_in": {"constant": -1.0,
           "terms": [{"coef": -0.1, "pow": 4, "rate": 1.0}]},
  "u_b": {"constant": -1.0,
          "terms": [{"coef": 0.3, "pow": 2, "rate": 1.0}]},
  "eps_list": [0.4, 0.2, 0.1, 0.05],
  "grid": {"L": 10.0, "N": 64, "dt": 0.004, "T": 0.02})" +
           extra + "\n}";
}

fs::path fresh_dir(const std::string& tag) {
    const fs::path p = fs::temp_directory_path() / ("kbl_test_" + tag);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("config parsing: happy path") {
    const RunConfig cfg = parse_config_text(base_config(
        R"(,
  "nu": 0.001,
  "gates": {"slope": 2.5, "self_convergence": 0.2},
  "outputs": {"snapshots": 5},
  "threshold_factor": 3.0,
  "scheme": "nu-regularized")"));
    CHECK(cfg.spec_version == 1);
    CHECK(cfg.flux_name == "quadratic");
    CHECK(cfg.eps_list.size() == 4);
    CHECK(cfg.eps_list[0] == 0.4);
    CHECK(cfg.nu == 0.001);
    CHECK(cfg.grid.N == 64);
    CHECK(cfg.grid.T == 0.02);
    CHECK(cfg.gates.slope == 2.5);
    CHECK(cfg.gates.self_convergence == 0.2);
    CHECK(cfg.snapshots == 5);
    CHECK(cfg.threshold_factor == 3.0);
    CHECK(cfg.scheme == "nu-regularized");
    CHECK(cfg.u_in.eval(0.0, 0) == doctest::Approx(-1.0));
    CHECK(cfg.u_b.eval(1.0, 0) ==
          doctest::Approx(-1.0 + 0.3 * std::exp(-1.0)));
    // defaults
    const RunConfig plain = parse_config_text(base_config());
    CHECK(plain.gates.slope == 2.7);
    CHECK(plain.gates.self_convergence == 0.10);
    CHECK(plain.snapshots == 0);
    CHECK(plain.nu == 0.0);
}

TEST_CASE("config parsing: schema violations") {
    auto expect_reject = [](const std::string& text) {
        CHECK_THROWS_AS(parse_config_text(text), ArgumentError);
    };
    expect_reject("not json at all {");
    expect_reject(R"({"spec_version": 2})");
    // missing sections
    expect_reject(R"({"spec_version": 1})");
    // unknown flux name
    std::string s = base_config();
    s.replace(s.find("quadratic"), 9, "septic");
    expect_reject(s);
    // empty and nonpositive eps
    s = base_config();
    s.replace(s.find("[0.4, 0.2, 0.1, 0.05]"), 21, "[]");
    expect_reject(s);
    s = base_config();
    s.replace(s.find("[0.4, 0.2, 0.1, 0.05]"), 21, "[0.1, -0.05]");
    expect_reject(s);
    // grid constraints
    s = base_config();
    s.replace(s.find("\"N\": 64"), 7, "\"N\": 8");
    expect_reject(s);
    s = base_config();
    s.replace(s.find("\"dt\": 0.004"), 11, "\"dt\": 0.0");
    expect_reject(s);
    // negative nu
    expect_reject(base_config(R"(, "nu": -1e-4)"));
    // unknown trig tag in a datum term
    s = base_config();
    s.replace(s.find("\"rate\": 1.0}]},\n  \"u_b\""), 12,
              "\"trig\": \"tan\"}]},\n  \"u_b\"");
    expect_reject(s);
}

TEST_CASE("config parsing: final time beyond the lifespan is rejected") {
    std::string s = base_config();
    s.replace(s.find("\"T\": 0.02"), 9, "\"T\": 5.0");  // lifespan ~ 1.1
    CHECK_THROWS_AS(parse_config_text(s), ArgumentError);
}

TEST_CASE("member_config applies the per-eps refinement rule") {
    RunConfig cfg = parse_config_text(base_config());
    cfg.grid.points_per_eps = 4.0;
    // eps = 0.4: ceil(4 * 10 / 0.4) = 100 > 64
    SolverConfig sc = member_config(cfg, 0.4, false);
    CHECK(sc.N == 100);
    CHECK(sc.dt == doctest::Approx(0.004 * 64.0 / 100.0));
    CHECK(sc.eps == 0.4);
    CHECK(sc.T == 0.02);
    // halved companion: N doubled, dt halved
    SolverConfig fine = member_config(cfg, 0.4, true);
    CHECK(fine.N == 200);
    CHECK(fine.dt == doctest::Approx(sc.dt / 2.0));
    // no refinement requested: base grid passes through
    cfg.grid.points_per_eps = 0.0;
    SolverConfig base = member_config(cfg, 0.05, false);
    CHECK(base.N == 64);
    CHECK(base.dt == 0.004);
}

TEST_CASE("validate_config exit codes") {
    const RunConfig good = parse_config_text(base_config());
    CHECK(validate_config(good) == kExitOk);

    RunConfig bad = good;
    // wall datum that does not match u_in at the corner
    bad.u_b = SmoothFn(-0.9, {{0.3, 2, 1.0, SmoothFn::Trig::None, 0.0}});
    CHECK(validate_config(bad) == kExitConfig);
}

TEST_CASE("run_single writes artifacts and honors exit codes") {
    RunConfig cfg = parse_config_text(base_config(
        R"(, "threshold_factor": 1e6, "outputs": {"snapshots": 3})"));
    const fs::path dir = fresh_dir("single");
    CHECK(run_single(cfg, 0.1, dir.string(), false) == kExitOk);
    CHECK(fs::exists(dir / "energy_report.json"));
    CHECK(fs::exists(dir / "snapshots" / "snap_0000.csv"));
    const std::string csv = slurp(dir / "snapshots" / "snap_0000.csv");
    CHECK(csv.rfind("x,w,W,u,V_scaled,u_eps_reconstructed", 0) == 0);
    const std::string rep = slurp(dir / "energy_report.json");
    CHECK(rep.find("sup_weighted") != std::string::npos);

    // determinism: a second identical run produces identical bytes
    const fs::path dir2 = fresh_dir("single2");
    CHECK(run_single(cfg, 0.1, dir2.string(), false) == kExitOk);
    CHECK(slurp(dir2 / "energy_report.json") == rep);

    // incompatible corner data refuse to run without --force
    RunConfig bad = cfg;
    bad.u_b = SmoothFn(-0.9, {{0.3, 2, 1.0, SmoothFn::Trig::None, 0.0}});
    CHECK(run_single(bad, 0.1, fresh_dir("single3").string(), false) ==
          kExitConfig);

    // a hair-trigger energy threshold maps to the threshold exit code
    RunConfig trig = cfg;
    trig.threshold_factor = 1e-12;
    CHECK(run_single(trig, 0.1, fresh_dir("single4").string(), false) ==
          kExitThreshold);
    fs::remove_all(dir);
    fs::remove_all(dir2);
}

TEST_CASE("run_sweep plumbing: artifacts, table, and report") {
    // Structural test of the sweep machinery on a deliberately coarse grid:
    // the gates are opened wide so the plumbing, not the physics, is under
    // test here (the acceptance suite runs the real gates).
    RunConfig cfg = parse_config_text(base_config(
        R"(,
  "threshold_factor": 1e6,
  "gates": {"slope": -100.0, "self_convergence": 1e6})"));
    const fs::path dir = fresh_dir("sweep");
    CHECK(run_sweep(cfg, dir.string(), false, 1) == kExitOk);
    CHECK(fs::exists(dir / "scaling_fit.json"));
    CHECK(fs::exists(dir / "sweep_table.csv"));
    for (double e : cfg.eps_list) {
        std::ostringstream sub;
        sub << "eps_" << e;
        CHECK(fs::exists(dir / sub.str() / "energy_report.json"));
    }
    const std::string table = slurp(dir / "sweep_table.csv");
    CHECK(table.rfind("eps,sup_energy,slope_partial,converged_flag", 0) == 0);
    const std::string fit = slurp(dir / "scaling_fit.json");
    CHECK(fit.find("\"slope\"") != std::string::npos);
    CHECK(fit.find("\"pass\": true") != std::string::npos);

    // a slope gate nothing can meet flips the exit code to 1
    RunConfig strict = cfg;
    strict.gates.slope = 1e9;
    CHECK(run_sweep(strict, fresh_dir("sweep2").string(), false, 1) == 1);

    // fewer than 4 eps values is a config error
    RunConfig few = cfg;
    few.eps_list = {0.2, 0.1};
    CHECK(run_sweep(few, fresh_dir("sweep3").string(), false, 1) ==
          kExitConfig);

    // report over the sweep artifacts
    CHECK(emit_report(dir.string(), false) == kExitOk);
    CHECK(emit_report(dir.string(), true) == kExitOk);
    fs::remove_all(dir);
}

TEST_CASE("emit_report with missing artifacts") {
    const fs::path dir = fresh_dir("empty");
    fs::create_directories(dir);
    CHECK(emit_report(dir.string(), false) == kExitConfig);
    fs::remove_all(dir);
}

TEST_CASE("load_config reads from disk and rejects absent files") {
    const fs::path p = fs::temp_directory_path() / "kbl_test_cfg.json";
    std::ofstream(p) << base_config();
    const RunConfig cfg = load_config(p.string());
    CHECK(cfg.flux_name == "quadratic");
    fs::remove(p);
    CHECK_THROWS_AS(load_config((p.string() + ".nope")), ArgumentError);
}
