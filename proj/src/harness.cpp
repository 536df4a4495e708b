#include "kbl/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "kbl/diagnostics.hpp"
#include "kbl/hyperbolic.hpp"
#include "kbl/layer.hpp"

namespace kbl {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

SmoothFn parse_datum(const json& j, const std::string& who) {
    if (!j.is_object())
        throw ArgumentError(who + ": expected an object with constant/terms");
    const double constant = j.value("constant", 0.0);
    std::vector<SmoothFn::Term> terms;
    for (const json& tj : j.value("terms", json::array())) {
        SmoothFn::Term t;
        t.coef = tj.at("coef").get<double>();
        t.pow = tj.value("pow", 0);
        t.rate = tj.value("rate", 0.0);
        t.freq = tj.value("freq", 0.0);
        const std::string trig = tj.value("trig", "none");
        if (trig == "none")
            t.trig = SmoothFn::Trig::None;
        else if (trig == "cos")
            t.trig = SmoothFn::Trig::Cos;
        else if (trig == "sin")
            t.trig = SmoothFn::Trig::Sin;
        else
            throw ArgumentError(who + ": unknown trig tag '" + trig + "'");
        if (t.pow < 0)
            throw ArgumentError(who + ": negative power");
        terms.push_back(t);
    }
    return SmoothFn(constant, std::move(terms));
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ArgumentError("JSON parse failure in '" + path +
                            "': " + e.what());
    }
    return j;
}

void write_text_file(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path);
    out << text;
    if (!out) throw ArgumentError("cannot write '" + path.string() + "'");
}

json energy_report_json(const RunConfig& cfg, const SolverConfig& sc,
                        const Trajectory& traj, const FluxModel& model) {
    const EnergyReport rep = build_energy_report(traj, model);
    json j;
    j["eps"] = sc.eps;
    j["nu"] = sc.nu;
    j["grid"] = {{"L", sc.L}, {"N", sc.N}, {"dt", sc.dt}, {"T", sc.T}};
    j["flux"] = cfg.flux_name;
    j["sup_weighted"] = rep.sup_weighted;
    j["tgrid"] = std::vector<double>(rep.tgrid.data(),
                                     rep.tgrid.data() + rep.tgrid.size());
    j["weighted"] = std::vector<double>(
        rep.weighted.data(), rep.weighted.data() + rep.weighted.size());
    if (rep.has_iterms) {
        j["iterms"] = rep.iterms;
        j["iterm_sum"] = rep.iterm_sum;
    }
    return j;
}

void write_snapshots(const RunConfig& cfg, const SolverConfig& sc,
                     const Trajectory& traj, const FluxModel& model,
                     const fs::path& dir) {
    fs::create_directories(dir);
    Vector one_t(1);
    for (size_t k = 0; k < traj.states.size(); ++k) {
        const RemainderState& st = traj.states[k];
        one_t(0) = st.t;
        const BoundaryTrace tr = boundary_trace(model, cfg.u_in, one_t);
        const HyperbolicField hyp =
            solve_characteristics(model, cfg.u_in, st.t, st.xgrid);
        const double u0 = tr.u0(0);
        const double dyx = sc.h() / sc.eps;
        const Index m = std::max<Index>(
            1, static_cast<Index>(std::ceil(dyx / sc.layer_dy)));
        const double hy = dyx / static_cast<double>(m);
        const Index kx = std::max<Index>(
            1, static_cast<Index>(
                   std::ceil(40.0 / std::sqrt(model.c()) / dyx)));
        const Vector ygrid = Vector::LinSpaced(
            kx * m + 1, 0.0, hy * static_cast<double>(kx * m));
        const LayerProfile layerV =
            solve_profile(model, u0, cfg.u_b.eval(st.t, 0) - u0, ygrid);
        const Vector full = reconstruct_full(hyp, layerV, st, sc.eps);

        std::ostringstream os;
        os << std::setprecision(17);
        os << "x,w,W,u,V_scaled,u_eps_reconstructed\n";
        for (Index i = 0; i < st.xgrid.size(); ++i) {
            const double V = sample_profile(layerV, st.xgrid(i) / sc.eps);
            os << st.xgrid(i) << ',' << st.w(i) << ',' << st.W(i) << ','
               << hyp.u(i) << ',' << V << ',' << full(i) << '\n';
        }
        std::ostringstream name;
        name << "snap_" << std::setw(4) << std::setfill('0') << k << ".csv";
        write_text_file(dir / name.str(), os.str());
    }
}

struct MemberOutcome {
    double eps = 0.0;
    bool halved = false;
    double sup_energy = 0.0;
    bool threshold_crossed = false;
    int error_code = kExitOk;
    std::string error;
    json report;
};

MemberOutcome run_member(const RunConfig& cfg, const FluxModel& model,
                         double eps, bool halved) {
    MemberOutcome out;
    out.eps = eps;
    out.halved = halved;
    SolverConfig sc = member_config(cfg, eps, halved);
    try {
        const Trajectory traj =
            solve_remainder(sc, model, cfg.u_in, cfg.u_b);
        out.sup_energy = traj.sup_weighted();
        out.report = energy_report_json(cfg, sc, traj, model);
    } catch (const ThresholdCrossedError& e) {
        out.threshold_crossed = true;
        out.error = e.what();
    } catch (const DivergenceError& e) {
        out.error_code = kExitSolver;
        out.error = e.what();
    } catch (const StabilityError& e) {
        out.error_code = kExitSolver;
        out.error = e.what();
    } catch (const LifespanError& e) {
        out.error_code = kExitSolver;
        out.error = e.what();
    } catch (const NearBlowupError& e) {
        out.error_code = kExitSolver;
        out.error = e.what();
    } catch (const std::exception& e) {
        out.error_code = kExitConfig;
        out.error = e.what();
    }
    return out;
}

int compatibility_gate(const RunConfig& cfg, bool force) {
    const CompatibilityReport rep =
        validate_compatibility(cfg.u_in, cfg.u_b);
    if (rep.all()) return kExitOk;
    std::cerr << "compatibility conditions at the corner (t,x)=(0,0) fail:"
              << (rep.values_match ? "" : " u_b(0)=u_in(0)")
              << (rep.uin_x_zero ? "" : " u_in'(0)=0")
              << (rep.uin_xxx_zero ? "" : " u_in'''(0)=0")
              << (rep.ub_t_zero ? "" : " u_b'(0)=0") << "\n";
    if (!force) {
        std::cerr << "refusing to run (use --force to override)\n";
        return kExitConfig;
    }
    std::cerr << "WARNING: --force set, running with an initial layer in "
                 "time; estimates do not apply\n";
    return kExitOk;
}

std::string format_table(const json& fit) {
    std::ostringstream os;
    os << std::setprecision(6);
    os << "eps        sup_energy     slope_partial  converged\n";
    const auto& eps = fit.at("eps_list");
    const auto& sup = fit.at("sup_energies");
    const auto& part = fit.at("slope_partial");
    const auto& conv = fit.at("converged");
    for (size_t i = 0; i < eps.size(); ++i) {
        os << std::left << std::setw(11) << eps[i].get<double>()
           << std::setw(15) << sup[i].get<double>() << std::setw(15);
        if (part[i].is_null())
            os << "-";
        else
            os << part[i].get<double>();
        os << (conv[i].get<bool>() ? "yes" : "no") << "\n";
    }
    os << "fitted slope " << fit.at("slope").get<double>() << " (gate "
       << fit.at("gate").get<double>() << "): "
       << (fit.at("pass").get<bool>() ? "pass" : "FAIL") << "\n";
    return os.str();
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ArgumentError(std::string("JSON parse failure: ") + e.what());
    }

    RunConfig cfg;
    try {
        cfg.spec_version = j.at("spec_version").get<int>();
        if (cfg.spec_version != 1)
            throw ArgumentError("unsupported spec_version " +
                                std::to_string(cfg.spec_version));
        const json& fj = j.at("flux");
        cfg.flux_name = fj.at("name").get<std::string>();
        for (const auto& [key, val] :
             fj.value("params", json::object()).items())
            cfg.flux_params[key] = val.get<double>();
        cfg.u_in = parse_datum(j.at("u_in"), "u_in");
        cfg.u_b = parse_datum(j.at("u_b"), "u_b");
        cfg.eps_list = j.at("eps_list").get<std::vector<double>>();
        cfg.nu = j.value("nu", 0.0);
        const json& gj = j.at("grid");
        cfg.grid.L = gj.at("L").get<double>();
        cfg.grid.N = gj.at("N").get<Index>();
        cfg.grid.dt = gj.at("dt").get<double>();
        cfg.grid.T = gj.at("T").get<double>();
        cfg.grid.points_per_eps = gj.value("points_per_eps", 0.0);
        if (j.contains("gates")) {
            cfg.gates.slope = j["gates"].value("slope", cfg.gates.slope);
            cfg.gates.self_convergence = j["gates"].value(
                "self_convergence", cfg.gates.self_convergence);
        }
        if (j.contains("outputs"))
            cfg.snapshots = j["outputs"].value("snapshots", Index{0});
        cfg.w_bound = j.value("w_bound", cfg.w_bound);
        cfg.threshold_factor =
            j.value("threshold_factor", cfg.threshold_factor);
        cfg.layer_dy = j.value("layer_dy", cfg.layer_dy);
        cfg.scheme = j.value("scheme", cfg.scheme);
    } catch (const json::exception& e) {
        throw ArgumentError(std::string("config schema violation: ") +
                            e.what());
    }

    if (cfg.eps_list.empty())
        throw ArgumentError("config: eps_list must be non-empty");
    for (double e : cfg.eps_list)
        if (!(e > 0.0)) throw ArgumentError("config: eps values must be > 0");
    if (cfg.grid.N < 16 || !(cfg.grid.L > 0.0) || !(cfg.grid.dt > 0.0) ||
        !(cfg.grid.T > 0.0))
        throw ArgumentError("config: grid must have N >= 16, L, dt, T > 0");
    if (cfg.nu < 0.0) throw ArgumentError("config: nu must be >= 0");

    // Registry resolution and the lifespan bound are part of load-time
    // validation: a config naming an unknown flux or a final time past the
    // classical lifespan is rejected before any solver starts.
    const FluxModel model = make_flux(cfg.flux_name, cfg.flux_params);
    const double That = estimate_lifespan(model, cfg.u_in);
    if (cfg.grid.T > That)
        throw ArgumentError(
            "config: T = " + std::to_string(cfg.grid.T) +
            " exceeds the estimated smooth lifespan " + std::to_string(That));
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open config '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

SolverConfig member_config(const RunConfig& cfg, double eps, bool halved) {
    SolverConfig sc;
    sc.eps = eps;
    sc.nu = cfg.nu;
    sc.L = cfg.grid.L;
    sc.N = cfg.grid.N;
    if (cfg.grid.points_per_eps > 0.0) {
        const Index refined = static_cast<Index>(
            std::ceil(cfg.grid.points_per_eps * cfg.grid.L / eps));
        sc.N = std::max(sc.N, refined);
    }
    sc.dt = cfg.grid.dt * static_cast<double>(cfg.grid.N) /
            static_cast<double>(sc.N);
    if (halved) {
        sc.N *= 2;
        sc.dt *= 0.5;
    }
    sc.T = cfg.grid.T;
    sc.scheme = cfg.scheme;
    sc.w_bound = cfg.w_bound;
    sc.threshold_factor = cfg.threshold_factor;
    sc.layer_dy = cfg.layer_dy;
    return sc;
}

int validate_config(const RunConfig& cfg) {
    const CompatibilityReport rep =
        validate_compatibility(cfg.u_in, cfg.u_b);
    auto line = [](const char* name, bool ok) {
        std::cout << name << ": " << (ok ? "pass" : "FAIL") << "\n";
    };
    line("u_b(0) = u_in(0)", rep.values_match);
    line("u_in'(0) = 0", rep.uin_x_zero);
    line("u_in'''(0) = 0", rep.uin_xxx_zero);
    line("u_b'(0) = 0", rep.ub_t_zero);
    const FluxModel model = make_flux(cfg.flux_name, cfg.flux_params);
    std::cout << "flux '" << cfg.flux_name << "': c = " << model.c()
              << ", lifespan estimate = "
              << estimate_lifespan(model, cfg.u_in) << "\n";
    return rep.all() ? kExitOk : kExitConfig;
}

int run_single(const RunConfig& cfg, double eps, const std::string& outdir,
               bool force) {
    const int gate = compatibility_gate(cfg, force);
    if (gate != kExitOk) return gate;
    const FluxModel model = make_flux(cfg.flux_name, cfg.flux_params);

    SolverConfig sc = member_config(cfg, eps, false);
    if (cfg.snapshots > 0) {
        const Index nt = std::max<Index>(
            1, static_cast<Index>(std::llround(sc.T / sc.dt)));
        sc.store_every = std::max<Index>(1, nt / cfg.snapshots);
    }

    Trajectory traj;
    try {
        traj = solve_remainder(sc, model, cfg.u_in, cfg.u_b);
    } catch (const ThresholdCrossedError& e) {
        std::cerr << e.what() << "\n";
        return kExitThreshold;
    } catch (const DivergenceError& e) {
        std::cerr << e.what() << "\n";
        return kExitSolver;
    } catch (const StabilityError& e) {
        std::cerr << e.what() << "\n";
        return kExitSolver;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
    }

    const fs::path dir(outdir);
    write_text_file(dir / "energy_report.json",
                    energy_report_json(cfg, sc, traj, model).dump(2) + "\n");
    if (cfg.snapshots > 0)
        write_snapshots(cfg, sc, traj, model, dir / "snapshots");
    std::cout << "eps " << eps << ": sup weighted energy "
              << traj.sup_weighted() << "\n";
    return kExitOk;
}

int run_sweep(const RunConfig& cfg, const std::string& outdir, bool force,
              int threads) {
    if (cfg.eps_list.size() < 4) {
        std::cerr << "sweep needs at least 4 eps values\n";
        return kExitConfig;
    }
    const int gate = compatibility_gate(cfg, force);
    if (gate != kExitOk) return gate;
    const FluxModel model = make_flux(cfg.flux_name, cfg.flux_params);

    struct Job {
        double eps;
        bool halved;
    };
    std::vector<Job> jobs;
    for (double eps : cfg.eps_list) {
        jobs.push_back({eps, false});
        jobs.push_back({eps, true});
    }

    std::vector<MemberOutcome> outcomes(jobs.size());
    const size_t pool = static_cast<size_t>(std::max(1, threads));
    for (size_t base = 0; base < jobs.size(); base += pool) {
        std::vector<std::future<MemberOutcome>> batch;
        const size_t hi = std::min(jobs.size(), base + pool);
        for (size_t i = base; i < hi; ++i)
            batch.push_back(std::async(
                pool == 1 ? std::launch::deferred : std::launch::async,
                [&cfg, &model, job = jobs[i]] {
                    return run_member(cfg, model, job.eps, job.halved);
                }));
        for (size_t i = base; i < hi; ++i)
            outcomes[i] = batch[i - base].get();
    }

    std::vector<SweepMember> members;
    const fs::path dir(outdir);
    for (size_t i = 0; i < outcomes.size(); i += 2) {
        const MemberOutcome& coarse = outcomes[i];
        const MemberOutcome& fine = outcomes[i + 1];
        for (const MemberOutcome* o : {&coarse, &fine}) {
            if (o->error_code != kExitOk) {
                std::cerr << "sweep member eps = " << o->eps
                          << (o->halved ? " (halved grid)" : "")
                          << " failed: " << o->error << "\n";
                return o->error_code;
            }
        }
        SweepMember m;
        m.eps = coarse.eps;
        m.threshold_crossed =
            coarse.threshold_crossed || fine.threshold_crossed;
        if (!m.threshold_crossed) {
            m.sup_energy = fine.sup_energy;
            const double scale =
                std::max(fine.sup_energy, coarse.sup_energy);
            m.converged = scale > 0.0 &&
                          std::abs(fine.sup_energy - coarse.sup_energy) <=
                              cfg.gates.self_convergence * scale;
            std::ostringstream sub;
            sub << "eps_" << coarse.eps;
            write_text_file(dir / sub.str() / "energy_report.json",
                            fine.report.dump(2) + "\n");
        } else {
            std::cerr << "sweep member eps = " << m.eps
                      << " crossed the eps^2 energy threshold\n";
        }
        members.push_back(m);
    }

    ScalingFit fit;
    try {
        fit = scaling_study(members);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        double max_eps = 0.0;
        for (const SweepMember& m : members) max_eps = std::max(max_eps, m.eps);
        const bool crossed_inside = std::any_of(
            members.begin(), members.end(), [&](const SweepMember& m) {
                return m.threshold_crossed && m.eps < max_eps;
            });
        return crossed_inside ? kExitThreshold : kExitSolver;
    }

    std::sort(members.begin(), members.end(),
              [](const SweepMember& a, const SweepMember& b) {
                  return a.eps > b.eps;
              });

    json fj;
    fj["eps_list"] = fit.eps_list;
    fj["sup_energies"] = fit.sup_energies;
    fj["slope"] = fit.slope;
    fj["intercept"] = fit.intercept;
    fj["gate"] = cfg.gates.slope;
    fj["pass"] = fit.slope >= cfg.gates.slope;
    json partial = json::array();
    json conv = json::array();
    for (size_t i = 0; i < fit.eps_list.size(); ++i) {
        if (i == 0)
            partial.push_back(nullptr);
        else
            partial.push_back(
                std::log(fit.sup_energies[i - 1] / fit.sup_energies[i]) /
                std::log(fit.eps_list[i - 1] / fit.eps_list[i]));
        const double e = fit.eps_list[i];
        const auto it = std::find_if(
            members.begin(), members.end(),
            [e](const SweepMember& m) { return m.eps == e; });
        conv.push_back(it != members.end() && it->converged);
    }
    fj["slope_partial"] = partial;
    fj["converged"] = conv;
    write_text_file(dir / "scaling_fit.json", fj.dump(2) + "\n");

    std::ostringstream csv;
    csv << std::setprecision(17);
    csv << "eps,sup_energy,slope_partial,converged_flag\n";
    for (size_t i = 0; i < fit.eps_list.size(); ++i) {
        csv << fit.eps_list[i] << ',' << fit.sup_energies[i] << ',';
        if (!partial[i].is_null()) csv << partial[i].get<double>();
        csv << ',' << (conv[i].get<bool>() ? 1 : 0) << '\n';
    }
    write_text_file(dir / "sweep_table.csv", csv.str());

    std::cout << format_table(fj);
    return fit.slope >= cfg.gates.slope ? kExitOk : 1;
}

int emit_report(const std::string& outdir, bool as_json) {
    const fs::path dir(outdir);
    const fs::path fitp = dir / "scaling_fit.json";
    const fs::path singlep = dir / "energy_report.json";
    if (fs::exists(fitp)) {
        const json fit = read_json_file(fitp.string());
        if (as_json)
            std::cout << fit.dump(2) << "\n";
        else
            std::cout << format_table(fit);
        return kExitOk;
    }
    if (fs::exists(singlep)) {
        const json rep = read_json_file(singlep.string());
        if (as_json) {
            std::cout << rep.dump(2) << "\n";
            return kExitOk;
        }
        std::cout << "eps " << rep.at("eps").get<double>()
                  << ", sup weighted energy "
                  << rep.at("sup_weighted").get<double>() << ", "
                  << rep.at("tgrid").size() << " time nodes\n";
        if (rep.contains("iterm_sum"))
            std::cout << "energy-identity ledger residual "
                      << rep.at("iterm_sum").get<double>() << "\n";
        return kExitOk;
    }
    std::cerr << "no artifacts found under '" << outdir << "'\n";
    return kExitConfig;
}

}  // namespace kbl
