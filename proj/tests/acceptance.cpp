// Acceptance suite: one line per criterion, nonzero exit when any fails.
// Runs the full reference configuration, so expect a few minutes of wall
// time on one core.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include "kbl/datum.hpp"
#include "kbl/diagnostics.hpp"
#include "kbl/dispersive.hpp"
#include "kbl/flux.hpp"
#include "kbl/gridops.hpp"
#include "kbl/hyperbolic.hpp"
#include "kbl/layer.hpp"

using namespace kbl;

namespace {

int failures = 0;

void report(int idx, const char* name, bool ok, const std::string& detail) {
    std::printf("[%d] %-42s %s  (%s)\n", idx, name, ok ? "PASS" : "FAIL",
                detail.c_str());
    if (!ok) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

SmoothFn reference_uin() {
    return SmoothFn(-1.0, {{-0.1, 4, 1.0, SmoothFn::Trig::None, 0.0}});
}

SmoothFn reference_ub() {
    return SmoothFn(-1.0, {{0.3, 2, 1.0, SmoothFn::Trig::None, 0.0}});
}

// Reference grid: spacing resolves the layer width eps/sqrt(c) with about
// four points per eps; dt keeps the advective CFL number near 0.4.
SolverConfig reference_member(double eps, bool halved) {
    SolverConfig cfg;
    cfg.eps = eps;
    cfg.L = 25.0;
    cfg.N = std::max<Index>(1000,
                            static_cast<Index>(std::ceil(4.0 * 25.0 / eps)));
    cfg.dt = 8.8e-4 * 1250.0 / static_cast<double>(cfg.N);
    cfg.T = 0.5;
    if (halved) {
        cfg.N *= 2;
        cfg.dt *= 0.5;
    }
    return cfg;
}

double rnd(unsigned& s) {
    s = s * 1664525u + 1013904223u;
    return static_cast<double>(s) / 4294967296.0 - 0.5;
}

// --- criterion 1: cubic energy scaling over the eps sweep ---------------

void criterion_scaling() {
    const FluxModel quad = make_flux("quadratic");
    const SmoothFn uin = reference_uin();
    const SmoothFn ub = reference_ub();
    std::vector<SweepMember> members;
    bool all_converged = true;
    for (double eps : {0.08, 0.04, 0.02, 0.01}) {
        double sup[2];
        for (int half = 0; half < 2; ++half) {
            const Trajectory traj = solve_remainder(
                reference_member(eps, half == 1), quad, uin, ub);
            sup[half] = traj.sup_weighted();
        }
        SweepMember m;
        m.eps = eps;
        m.sup_energy = sup[1];
        const double scale = std::max(sup[0], sup[1]);
        m.converged = scale > 0.0 &&
                      std::abs(sup[1] - sup[0]) <= 0.10 * scale;
        all_converged = all_converged && m.converged;
        members.push_back(m);
    }
    double slope = 0.0;
    bool ok = all_converged;
    try {
        slope = scaling_study(members).slope;
        ok = ok && slope >= 2.7;
    } catch (const std::exception&) {
        ok = false;
    }
    report(1, "cubic energy scaling in eps", ok,
           fmt("slope %.3f >= 2.7, grids self-converged", slope));
}

// --- criterion 2: layer profile oracles ---------------------------------

void criterion_layer_oracles() {
    // (a) linear flux: V = Vbar e^{-y}
    const FluxModel lin = make_flux("linear", {{"k", 1.0}});
    const Vector yg = Vector::LinSpaced(4001, 0.0, 40.0);
    const LayerProfile pl = solve_profile(lin, 0.5, -0.4, yg);
    double elin = 0.0;
    for (Index i = 0; i < yg.size(); ++i)
        elin = std::max(elin,
                        std::abs(pl.values(i) + 0.4 * std::exp(-yg(i))));

    // (b) quadratic flux closed forms on y in [0, 10]
    const FluxModel quad =
        make_flux("quadratic", {{"jlo", -1.6}, {"jhi", 0.0}});
    const double kappa = std::sqrt(1.5);
    const Vector ys = Vector::LinSpaced(2001, 0.0, 10.0);
    double esech = 0.0;
    {
        const double Vbar = 1.0 - 1e-9;
        const LayerProfile p = solve_profile(quad, -1.0, Vbar, ys);
        const double y0 = std::acosh(std::sqrt(3.0 / Vbar)) / kappa;
        for (Index i = 0; i < ys.size(); ++i) {
            const double c = std::cosh(kappa * (ys(i) + y0));
            const double exact = 3.0 / (c * c);
            esech = std::max(esech,
                             std::abs(p.values(i) - exact) / std::abs(exact));
        }
    }
    double ecsch = 0.0;
    {
        const double Vbar = -0.5;
        const LayerProfile p = solve_profile(quad, -1.0, Vbar, ys);
        const double y0 = std::asinh(std::sqrt(-3.0 / Vbar)) / kappa;
        for (Index i = 0; i < ys.size(); ++i) {
            const double s = std::sinh(kappa * (ys(i) + y0));
            const double exact = -3.0 / (s * s);
            ecsch = std::max(ecsch,
                             std::abs(p.values(i) - exact) / std::abs(exact));
        }
    }

    // (c) decay bound on the default quadratic model
    const FluxModel quad0 = make_flux("quadratic");
    const double root_c = std::sqrt(quad0.c());
    bool decay_ok = true;
    for (double Vbar : {-0.5, -0.2, 0.05, 0.15}) {
        const Vector yd = make_fast_grid(quad0, 0.01);
        const LayerProfile p = solve_profile(quad0, -1.0, Vbar, yd);
        for (Index i = 0; i < yd.size(); ++i)
            decay_ok = decay_ok &&
                       std::abs(p.values(i)) <=
                           std::abs(Vbar) * std::exp(-root_c * yd(i)) + 1e-12;
    }

    report(2, "layer profile oracles", elin <= 1e-8 && esech <= 1e-6 &&
                                           ecsch <= 1e-6 && decay_ok,
           fmt("exp %.1e <= 1e-8, sech2/csch2 %.1e/%.1e <= 1e-6, decay bound",
               elin, esech, ecsch));
}

// --- criterion 3: time-derivative layer decay ---------------------------

void criterion_derivative_layer() {
    const FluxModel quad = make_flux("quadratic");
    const SmoothFn uin = reference_uin();
    const SmoothFn ub = reference_ub();
    const Vector yg = make_fast_grid(quad, 0.005);
    const double gate = std::sqrt(quad.c()) / 2.0 - 0.05;

    Vector tg(2);
    tg << 0.0, 0.1;
    const BoundaryTrace tr = boundary_trace(quad, uin, tg);

    // t = 0: compatibility makes the source and wall value vanish
    const LayerProfile V0 =
        solve_profile(quad, tr.u0(0), ub.eval(0.0, 0) - tr.u0(0), yg);
    const LayerProfile dtV0 = solve_dtV(
        quad, tr.u0(0), tr.du0(0), ub.eval(0.0, 1) - tr.du0(0), V0);
    const double zero_sup = dtV0.values.cwiseAbs().maxCoeff();

    // t = 0.1: fitted decay rate against the half-rate gate
    const LayerProfile V1 =
        solve_profile(quad, tr.u0(1), ub.eval(0.1, 0) - tr.u0(1), yg);
    const LayerProfile dtV1 = solve_dtV(
        quad, tr.u0(1), tr.du0(1), ub.eval(0.1, 1) - tr.du0(1), V1);
    double rate = 0.0;
    bool ok = zero_sup <= 1e-12;
    try {
        rate = fit_decay_rate(dtV1);
        ok = ok && rate >= gate;
    } catch (const std::exception&) {
        ok = false;
    }
    report(3, "time-derivative layer decay", ok,
           fmt("rate %.3f >= %.3f, dtV at t=0 sup %.1e", rate, gate,
               zero_sup));
}

// --- criterion 4: characteristics solver --------------------------------

void criterion_characteristics() {
    // linear flux translation
    const FluxModel lin = make_flux("linear", {{"k", 1.0}});
    const SmoothFn uin_l(0.5, {{0.3, 2, 1.0, SmoothFn::Trig::None, 0.0}});
    const Vector xg = Vector::LinSpaced(401, 0.0, 20.0);
    const HyperbolicField fl = solve_characteristics(lin, uin_l, 0.7, xg);
    double etrans = 0.0;
    for (Index i = 0; i < xg.size(); ++i)
        etrans = std::max(etrans,
                          std::abs(fl.u(i) - uin_l.eval(xg(i) + 0.7, 0)));

    // quadratic flux against a bisection oracle
    const FluxModel quad = make_flux("quadratic");
    const SmoothFn uin = reference_uin();
    double ebis = 0.0;
    for (double x : {0.0, 0.5, 1.0, 3.0, 7.0}) {
        Vector one(1);
        one << x;
        const HyperbolicField f = solve_characteristics(quad, uin, 0.1, one);
        double lo = -1.59, hi = -0.81;
        auto res = [&](double u) { return u - uin.eval(x - 6.0 * u * 0.1, 0); };
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (res(lo) * res(mid) <= 0.0)
                hi = mid;
            else
                lo = mid;
        }
        ebis = std::max(ebis, std::abs(f.u(0) - 0.5 * (lo + hi)));
    }

    // conservation-law residual refines at second order
    auto residual = [&](double h, double dt) {
        const Vector x = Vector::LinSpaced(
            static_cast<Index>(12.0 / h) + 1, 0.0, 12.0);
        const HyperbolicField fm = solve_characteristics(quad, uin, 0.3 - dt, x);
        const HyperbolicField f0 = solve_characteristics(quad, uin, 0.3, x);
        const HyperbolicField fp = solve_characteristics(quad, uin, 0.3 + dt, x);
        double worst = 0.0;
        for (Index i = 1; i + 1 < x.size(); ++i) {
            const double dtu = (fp.u(i) - fm.u(i)) / (2 * dt);
            const double dxf =
                (quad.eval(f0.u(i + 1), 0) - quad.eval(f0.u(i - 1), 0)) /
                (2 * h);
            worst = std::max(worst, std::abs(dtu + dxf));
        }
        return worst;
    };
    const double r1 = residual(0.02, 0.002);
    const double r2 = residual(0.01, 0.001);

    report(4, "characteristics solver", etrans <= 1e-12 && ebis <= 1e-12 &&
                                            r2 <= r1 / 3.0,
           fmt("translation %.1e, oracle %.1e <= 1e-12, residual ratio %.2f",
               etrans, ebis, r1 / r2));
}

// --- criterion 5: energy-identity ledger --------------------------------

void criterion_ledger() {
    const FluxModel quad = make_flux("quadratic");
    const SmoothFn uin = reference_uin();
    const SmoothFn ub = reference_ub();
    const double eps = 0.08;
    double sums[3] = {0, 0, 0};
    double i1 = 0.0;
    for (int lvl = 0; lvl < 3; ++lvl) {
        SolverConfig cfg;
        cfg.eps = eps;
        cfg.L = 25.0;
        cfg.N = 1250 << lvl;
        cfg.dt = 8.8e-4 / (1 << lvl);
        cfg.T = 0.5;
        cfg.store_every = 1;
        cfg.store_sources = true;
        const Trajectory traj = solve_remainder(cfg, quad, uin, ub);
        const auto I = iterm_ledger(traj, quad);
        sums[lvl] = std::abs(I[6]);
        i1 = I[0];
    }
    // The first term telescopes to half the squared mass drift, which the
    // interior source makes O(eps^4); it is a square, so it cannot go
    // negative beyond rounding.
    const bool i1_ok = i1 <= eps * eps * eps * eps && i1 >= -1e-12;
    const bool order_ok =
        sums[1] < sums[0] && sums[2] < sums[1] && sums[1] / sums[2] >= 2.0;
    report(5, "energy-identity ledger", i1_ok && order_ok,
           fmt("|sum| %.2e -> %.2e (finest ratio %.2f >= 2), I1 within eps^4",
               sums[0], sums[2], sums[1] / sums[2]));
}

// --- criterion 6: screened-Poisson kernel -------------------------------

void criterion_helmholtz() {
    const double a = 0.7, L = 40.0;
    auto err = [&](Index N) {
        const double h = L / static_cast<double>(N);
        Vector rhs(N + 1);
        for (Index i = 0; i <= N; ++i)
            rhs(i) = (1.0 - a * a) * std::exp(-h * static_cast<double>(i));
        const Vector z = helmholtz_solve_halfline(a, rhs, 1.0, h);
        double worst = 0.0;
        for (Index i = 0; i < N; ++i)
            worst = std::max(
                worst,
                std::abs(z(i) - std::exp(-h * static_cast<double>(i))));
        return worst;
    };
    const double e1 = err(400);
    const double e2 = err(800);

    // discrete identity at interior nodes
    const double h = 0.05;
    const Index n = 201;
    Vector rhs(n);
    for (Index i = 0; i < n; ++i)
        rhs(i) = std::sin(0.37 * static_cast<double>(i));
    const Vector z = helmholtz_solve_halfline(1.3, rhs, 0.4, h);
    const double r = 1.3 * 1.3 / (h * h);
    double eid = 0.0;
    for (Index i = 1; i + 1 < n; ++i) {
        const double lhs = z(i) - r * (z(i + 1) - 2.0 * z(i) + z(i - 1));
        eid = std::max(eid, std::abs(lhs - rhs(i)) /
                                (1.0 + std::abs(rhs(i))));
    }
    report(6, "screened-Poisson kernel", eid <= 1e-12 && e2 <= e1 / 3.5,
           fmt("identity %.1e <= 1e-12, refinement ratio %.2f >= 3.5", eid,
               e1 / e2));
}

// --- criterion 7: interpolation inequality ------------------------------

void criterion_interpolation() {
    const double L = 60.0;
    const Index n = 2401;
    const double h = L / static_cast<double>(n - 1);
    unsigned seed = 321u;
    bool ok = true;
    double worst_margin = 1e300;
    for (int trial = 0; trial < 20; ++trial) {
        const double c1 = rnd(seed), c2 = rnd(seed), c3 = rnd(seed);
        const double rate = 0.3 + 0.4 * (rnd(seed) + 0.5);
        Vector zv(n);
        for (Index i = 0; i < n; ++i) {
            const double x = static_cast<double>(i) * h;
            zv(i) = (c1 * x + c2 * x * x + c3 * x * x * x) *
                    std::exp(-rate * x);
        }
        const auto [lhs, rhs] = check_interpolation(zv, h);
        ok = ok && lhs <= rhs;
        worst_margin = std::min(worst_margin, rhs / lhs);
    }
    report(7, "interpolation inequality (20 samples)", ok,
           fmt("min rhs/lhs ratio %.2f >= 1", worst_margin));
}

// --- criterion 8: necessity of the boundary layer -----------------------

void criterion_layer_necessity() {
    const FluxModel quad = make_flux("quadratic");
    const SmoothFn uin = reference_uin();
    const SmoothFn ub = reference_ub();

    // the outer field alone misses the wall datum by an O(1) amount
    const Vector tgrid = Vector::LinSpaced(101, 0.0, 0.5);
    const BoundaryTrace tr = boundary_trace(quad, uin, tgrid);
    double mismatch = 0.0;
    for (Index i = 0; i < tgrid.size(); ++i)
        mismatch = std::max(mismatch,
                            std::abs(tr.u0(i) - ub.eval(tgrid(i), 0)));

    // the full reconstruction hits the wall datum exactly, and its interior
    // residual (outside the layer) drops at design order with eps
    std::vector<double> resid;
    double wall_err = 0.0;
    const Vector yg = make_fast_grid(quad, 0.002);
    for (double eps : {0.08, 0.04, 0.02, 0.01}) {
        SolverConfig cfg = reference_member(eps, false);
        cfg.store_every = 1;
        const Trajectory traj = solve_remainder(cfg, quad, uin, ub);
        const size_t mid = traj.states.size() / 2;
        std::vector<Vector> fields;
        Vector tg(3);
        for (int j = -1; j <= 1; ++j) {
            const RemainderState& st = traj.states[mid + j];
            tg(j + 1) = st.t;
            Vector one(1);
            one << st.t;
            const BoundaryTrace b = boundary_trace(quad, uin, one);
            const HyperbolicField hyp =
                solve_characteristics(quad, uin, st.t, st.xgrid);
            const LayerProfile V = solve_profile(
                quad, b.u0(0), ub.eval(st.t, 0) - b.u0(0), yg);
            fields.push_back(reconstruct_full(hyp, V, st, eps));
            wall_err = std::max(
                wall_err, std::abs(fields.back()(0) - ub.eval(st.t, 0)));
        }
        resid.push_back(
            residual_full(quad, fields, tg, cfg.h(), eps, 0.5));
    }
    const double order =
        std::log(resid.front() / resid.back()) /
        std::log(0.08 / 0.01);
    report(8, "necessity of the boundary layer",
           mismatch >= 0.1 && wall_err <= 1e-10 && order >= 1.5,
           fmt("outer wall defect %.2f O(1), reconstruction wall %.1e, "
               "interior residual order %.2f >= 1.5",
               mismatch, wall_err, order));
}

// --- criterion 9: nu-regularization robustness --------------------------

void criterion_nu_robustness() {
    const FluxModel quad = make_flux("quadratic");
    const SmoothFn uin = reference_uin();
    const SmoothFn ub = reference_ub();
    std::vector<std::vector<Vector>> states;
    for (double nu : {0.0, 1e-4, 1e-5}) {
        SolverConfig cfg;
        cfg.eps = 0.04;
        cfg.L = 25.0;
        cfg.N = 2500;
        cfg.dt = 4.4e-4;
        cfg.T = 0.5;
        cfg.store_every = 1;
        cfg.nu = nu;
        if (nu > 0.0) cfg.scheme = "nu-regularized";
        const Trajectory traj = solve_remainder(cfg, quad, uin, ub);
        std::vector<Vector> ws;
        for (const auto& st : traj.states) ws.push_back(st.w);
        states.push_back(std::move(ws));
    }
    const double h = 25.0 / 2500.0;
    double dist[2];
    for (int j = 1; j <= 2; ++j) {
        double d = 0.0;
        for (size_t k = 0; k < states[0].size(); ++k) {
            const Vector diff = states[static_cast<size_t>(j)][k] -
                                states[0][k];
            d = std::max(d,
                         std::sqrt(trapz(Vector(diff.array().square()), h)));
        }
        dist[j - 1] = d;
    }
    // linear-in-nu response: tenfold nu change moves the distance tenfold
    const double ratio = dist[0] / dist[1];
    const bool ok = dist[0] > 0.0 && dist[1] > 0.0 && dist[0] <= 1e-4 &&
                    dist[1] <= 1e-5 && ratio >= 5.0 && ratio <= 20.0;
    report(9, "nu-regularization robustness", ok,
           fmt("dist(1e-4) %.2e, dist(1e-5) %.2e, ratio %.1f in [5, 20]",
               dist[0], dist[1], ratio));
}

}  // namespace

int main() {
    criterion_scaling();
    criterion_layer_oracles();
    criterion_derivative_layer();
    criterion_characteristics();
    criterion_ledger();
    criterion_helmholtz();
    criterion_interpolation();
    criterion_layer_necessity();
    criterion_nu_robustness();
    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
