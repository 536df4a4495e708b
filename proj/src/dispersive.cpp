#include "kbl/dispersive.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "kbl/gridops.hpp"

namespace kbl {

namespace {

void require_uniform_x(const Vector& xgrid, const char* who) {
    if (xgrid.size() < 3)
        throw ArgumentError(std::string(who) + ": need at least 3 points");
    const double h = xgrid(1) - xgrid(0);
    for (Index i = 1; i + 1 < xgrid.size(); ++i)
        if (std::abs((xgrid(i + 1) - xgrid(i)) - h) > 1e-9 * h)
            throw ArgumentError(std::string(who) + ": grid must be uniform");
}

// Upwind-biased flux divergence. f' < 0: information travels toward the
// wall, so the stencil leans toward larger x. Second order in the interior,
// centered at the last interior point where the forward stencil would leave
// the grid.
Vector flux_divergence(const Vector& phi, double h) {
    const Index n = phi.size();
    Vector out = Vector::Zero(n);
    for (Index i = 1; i + 2 < n; ++i)
        out(i) = (-3.0 * phi(i) + 4.0 * phi(i + 1) - phi(i + 2)) / (2.0 * h);
    out(n - 2) = (phi(n - 1) - phi(n - 3)) / (2.0 * h);
    return out;
}

double weighted_energy_inline(const Vector& w, double h, double eps) {
    const Vector wx = diff1(w, h);
    Vector dens = w.array().square() +
                  0.5 * eps * eps * wx.array().square();
    return trapz(dens, h);
}

}  // namespace

double sample_profile(const LayerProfile& profile, double y) {
    const Vector& yg = profile.ygrid;
    const Vector& v = profile.values;
    if (y < 0.0) throw ArgumentError("sample_profile: negative coordinate");
    const double hy = yg(1) - yg(0);
    const double s = y / hy;
    const double snapped = std::round(s);
    if (snapped >= static_cast<double>(yg.size() - 1))
        return snapped == static_cast<double>(yg.size() - 1) &&
                       std::abs(s - snapped) <= 1e-9
                   ? v(yg.size() - 1)
                   : 0.0;
    if (std::abs(s - snapped) <= 1e-9) return v(static_cast<Index>(snapped));
    const Index i = static_cast<Index>(std::floor(s));
    const double theta = s - static_cast<double>(i);
    return (1.0 - theta) * v(i) + theta * v(i + 1);
}

SourcePair assemble_sources(const FluxModel& model, const HyperbolicField& hyp,
                            const LayerProfile& layerV,
                            const LayerProfile& layer_dtV, double eps) {
    if (layerV.kind != LayerKind::V || layer_dtV.kind != LayerKind::dtV)
        throw ArgumentError("assemble_sources: wrong layer kinds");
    if (layerV.ygrid.size() != layer_dtV.ygrid.size())
        throw ArgumentError("assemble_sources: layer grids differ");

    const Index n = hyp.xgrid.size();
    const double xmax = hyp.xgrid(n - 1);
    const double horizon =
        std::min(xmax / eps, 40.0 / std::sqrt(model.c()));
    if (layerV.ygrid(layerV.ygrid.size() - 1) < horizon * (1.0 - 1e-9))
        throw CoverageError(
            "assemble_sources: layer fast grid stops before the decay "
            "horizon");

    const double u0 = layerV.u0;
    const double sign = layerV.Vbar <= 0.0 ? 1.0 : -1.0;

    SourcePair s;
    s.E_inn = eps * eps * hyp.uxxx;
    s.E_b.resize(n);
    for (Index i = 0; i < n; ++i) {
        const double y = hyp.xgrid(i) / eps;
        const double V = sample_profile(layerV, y);
        const double dtV = sample_profile(layer_dtV, y);
        if (V == 0.0) {
            s.E_b(i) = dtV;
            continue;
        }
        const double u = hyp.u(i);
        // dV/dy from the first-integral identity, exact on the profile.
        const double F = potential_F(model, u0, V);
        const double Vy = sign * std::sqrt(std::max(0.0, -2.0 * F));
        // d/dx H(u, V(x/eps), u0) by the chain rule: the u-slot moves with
        // ux, the two V-slots move with Vy/eps.
        s.E_b(i) = dtV + (model.eval(u + V, 1) - model.eval(u, 1)) * hyp.ux(i) +
                   (model.eval(u + V, 1) - model.eval(u0 + V, 1)) * Vy / eps;
    }
    return s;
}

Vector helmholtz_solve_halfline(double a, const Vector& rhs, double left_bc,
                                double h) {
    if (!(a > 0.0))
        throw ArgumentError("helmholtz_solve_halfline: a must be positive");
    const Index n = rhs.size();
    if (n < 3)
        throw ArgumentError("helmholtz_solve_halfline: need >= 3 points");
    const double r = a * a / (h * h);
    const Index m = n - 2;
    Vector lo = Vector::Constant(m, -r);
    Vector di = Vector::Constant(m, 1.0 + 2.0 * r);
    Vector up = Vector::Constant(m, -r);
    Vector b = rhs.segment(1, m);
    b(0) += r * left_bc;
    Vector z(n);
    z(0) = left_bc;
    z(n - 1) = 0.0;
    z.segment(1, m) = solve_tridiagonal(lo, di, up, b);
    return z;
}

Stepper::Stepper(const SolverConfig& cfg, const FluxModel& model)
    : cfg_(cfg), model_(model) {
    if (cfg_.N < 16) throw ArgumentError("Stepper: N must be >= 16");
    if (!(cfg_.dt > 0.0) || !(cfg_.L > 0.0) || !(cfg_.eps > 0.0))
        throw ArgumentError("Stepper: dt, L, eps must be positive");
    if (cfg_.scheme != "imex-dispersion" && cfg_.scheme != "nu-regularized")
        throw ArgumentError("Stepper: unknown scheme '" + cfg_.scheme + "'");

    const Index n = cfg_.N + 1;
    const double h = cfg_.h();
    const double r = cfg_.dt * cfg_.eps * cfg_.eps / (h * h * h);

    // I + dt eps^2 D3 with the biased 4-point stencil
    //   D3 w_i = (w_{i+2} - 3 w_{i+1} + 3 w_i - w_{i-1}) / h^3,
    // whose Fourier symbol has nonnegative real part, so the backward-Euler
    // step never amplifies. Dirichlet rows at both ends; odd-reflection
    // ghost w_{N+1} = -w_{N-1} closes the last interior row.
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(4 * n));
    trip.emplace_back(0, 0, 1.0);
    trip.emplace_back(n - 1, n - 1, 1.0);
    for (Index i = 1; i + 2 < n; ++i) {
        trip.emplace_back(i, i - 1, -r);
        trip.emplace_back(i, i, 1.0 + 3.0 * r);
        trip.emplace_back(i, i + 1, -3.0 * r);
        trip.emplace_back(i, i + 2, r);
    }
    trip.emplace_back(n - 2, n - 3, -r);
    trip.emplace_back(n - 2, n - 2, 1.0 + 2.0 * r);
    trip.emplace_back(n - 2, n - 1, -3.0 * r);

    disp_.resize(n, n);
    disp_.setFromTriplets(trip.begin(), trip.end());
    disp_.makeCompressed();
    lu_.compute(disp_);
    if (lu_.info() != Eigen::Success)
        throw StabilityError("Stepper: dispersion matrix factorization failed");
}

RemainderState Stepper::step(const RemainderState& state,
                             const SourcePair& sources,
                             const Vector& u_a) const {
    const Index n = cfg_.N + 1;
    if (state.w.size() != n || u_a.size() != n ||
        sources.E_inn.size() != n || sources.E_b.size() != n)
        throw ArgumentError("step_remainder: size mismatch with config grid");
    const double h = cfg_.h();
    const double dt = cfg_.dt;

    // Admissibility and CFL guards on the frozen background.
    double amax = 0.0;
    for (Index i = 0; i < n; ++i) {
        const double state_val = u_a(i) + state.w(i);
        if (std::abs(state.w(i)) > cfg_.w_bound ||
            !model_.admissible().contains(state_val))
            throw DivergenceError(
                "step_remainder: remainder left the admissibility envelope");
        amax = std::max(amax, std::abs(model_.eval(state_val, 1)));
    }
    if (dt * amax / h > 1.0)
        throw StabilityError("step_remainder: advective CFL number above 1");

    auto rhs = [&](const Vector& w) {
        Vector phi(n);
        for (Index i = 0; i < n; ++i) {
            const double a = u_a(i);
            const double aw = a + w(i);
            if (!model_.admissible().contains(aw))
                throw DivergenceError(
                    "step_remainder: remainder left the admissibility "
                    "envelope inside a stage");
            phi(i) = model_.eval(aw, 0) - model_.eval(a, 0);
        }
        Vector out = -flux_divergence(phi, h) - sources.E_inn - sources.E_b;
        out(0) = 0.0;
        out(n - 1) = 0.0;
        return out;
    };

    // Explicit stage: SSP-RK3 on flux + sources.
    const Vector& w0 = state.w;
    Vector w1 = w0 + dt * rhs(w0);
    Vector w2 = 0.75 * w0 + 0.25 * (w1 + dt * rhs(w1));
    Vector we = (w0 + 2.0 * (w2 + dt * rhs(w2))) / 3.0;

    // Implicit dispersion stage.
    we(0) = 0.0;
    we(n - 1) = 0.0;
    Vector wn = lu_.solve(we);
    if (lu_.info() != Eigen::Success)
        throw StabilityError("step_remainder: dispersion solve failed");
    wn(0) = 0.0;
    wn(n - 1) = 0.0;

    // nu-regularization: the time increment passes through (I - nu D^2)^-1.
    if (cfg_.nu > 0.0) {
        Vector delta = wn - w0;
        delta = helmholtz_solve_halfline(std::sqrt(cfg_.nu), delta, 0.0, h);
        wn = w0 + delta;
        wn(0) = 0.0;
        wn(n - 1) = 0.0;
    }

    if (!wn.allFinite())
        throw DivergenceError("step_remainder: non-finite state");

    RemainderState next;
    next.t = state.t + dt;
    next.xgrid = state.xgrid;
    next.w = std::move(wn);
    next.W = cumtrapz(next.w, h);
    return next;
}

RemainderState step_remainder(const RemainderState& state,
                              const SourcePair& sources,
                              const SolverConfig& cfg, const FluxModel& model,
                              const Vector& u_a) {
    return Stepper(cfg, model).step(state, sources, u_a);
}

Trajectory solve_remainder(const SolverConfig& cfg, const FluxModel& model,
                           const SmoothFn& u_in, const SmoothFn& u_b) {
    if (!(cfg.T > 0.0)) throw ArgumentError("solve_remainder: T must be > 0");
    const double That = estimate_lifespan(model, u_in);
    if (cfg.T > That)
        throw LifespanError(
            "solve_remainder: final time beyond the estimated smooth "
            "lifespan");

    SolverConfig c = cfg;
    const Index nt =
        std::max<Index>(1, static_cast<Index>(std::llround(cfg.T / cfg.dt)));
    c.dt = cfg.T / static_cast<double>(nt);
    const double h = c.h();
    const Index n = c.N + 1;

    // Fast grid aligned with the x grid: x_i / eps lands exactly on a node,
    // so profile sampling never interpolates on the slow grid. Extends past
    // the decay horizon 40/sqrt(c).
    const double dyx = h / c.eps;
    const Index m = std::max<Index>(
        1, static_cast<Index>(std::ceil(dyx / c.layer_dy)));
    const double hy = dyx / static_cast<double>(m);
    const double horizon = 40.0 / std::sqrt(model.c());
    const Index kx =
        std::max<Index>(1, static_cast<Index>(std::ceil(horizon / dyx)));
    const Index ny = kx * m;
    const Vector ygrid =
        Vector::LinSpaced(ny + 1, 0.0, hy * static_cast<double>(ny));

    Stepper stepper(c, model);

    Trajectory traj;
    traj.cfg = c;
    traj.tgrid.resize(nt + 1);
    traj.weighted.resize(nt + 1);

    RemainderState state;
    state.t = 0.0;
    state.xgrid = Vector::LinSpaced(n, 0.0, c.L);
    state.w = Vector::Zero(n);
    state.W = Vector::Zero(n);
    traj.tgrid(0) = 0.0;
    traj.weighted(0) = 0.0;

    Vector one_t(1);
    const double threshold = c.threshold_factor * c.eps * c.eps;

    auto store = [&](Index step_idx, const RemainderState& st,
                     const SourcePair* src, const Vector* ua) {
        traj.states.push_back(st);
        traj.state_steps.push_back(step_idx);
        if (c.store_sources && src && ua) {
            traj.sources.push_back(*src);
            traj.u_a.push_back(*ua);
        }
    };

    for (Index k = 0; k < nt; ++k) {
        const double t = state.t;
        one_t(0) = t;
        const BoundaryTrace tr = boundary_trace(model, u_in, one_t);
        const HyperbolicField hyp =
            solve_characteristics(model, u_in, t, state.xgrid);
        const double u0 = tr.u0(0);
        const double Vbar = u_b.eval(t, 0) - u0;
        const LayerProfile layerV = solve_profile(model, u0, Vbar, ygrid);
        const double wallZ = u_b.eval(t, 1) - tr.du0(0);
        const LayerProfile dtV =
            solve_dtV(model, u0, tr.du0(0), wallZ, layerV);
        const SourcePair src =
            assemble_sources(model, hyp, layerV, dtV, c.eps);

        Vector ua(n);
        for (Index i = 0; i < n; ++i)
            ua(i) = hyp.u(i) + sample_profile(layerV, state.xgrid(i) / c.eps);

        if (k == 0) {
            store(0, state, &src, &ua);
        } else if (c.store_every > 0 && k % c.store_every == 0) {
            store(k, state, &src, &ua);
        }

        state = stepper.step(state, src, ua);
        traj.tgrid(k + 1) = state.t;
        const double e = weighted_energy_inline(state.w, h, c.eps);
        traj.weighted(k + 1) = e;
        if (e > threshold)
            throw ThresholdCrossedError(
                "solve_remainder: weighted energy crossed eps^2 at t = " +
                std::to_string(state.t));
    }

    // Final snapshot; sources and u_a at T are recomputed so ledger
    // consumers have aligned data at every stored step.
    if (c.store_sources) {
        one_t(0) = state.t;
        const BoundaryTrace tr = boundary_trace(model, u_in, one_t);
        const HyperbolicField hyp =
            solve_characteristics(model, u_in, state.t, state.xgrid);
        const double u0 = tr.u0(0);
        const LayerProfile layerV =
            solve_profile(model, u0, u_b.eval(state.t, 0) - u0, ygrid);
        const LayerProfile dtV = solve_dtV(
            model, u0, tr.du0(0), u_b.eval(state.t, 1) - tr.du0(0), layerV);
        const SourcePair src =
            assemble_sources(model, hyp, layerV, dtV, c.eps);
        Vector ua(n);
        for (Index i = 0; i < n; ++i)
            ua(i) = hyp.u(i) + sample_profile(layerV, state.xgrid(i) / c.eps);
        store(nt, state, &src, &ua);
    } else {
        store(nt, state, nullptr, nullptr);
    }
    return traj;
}

Vector reconstruct_full(const HyperbolicField& hyp, const LayerProfile& layerV,
                        const RemainderState& state, double eps) {
    if (hyp.xgrid.size() != state.xgrid.size() ||
        (hyp.xgrid - state.xgrid).cwiseAbs().maxCoeff() > 1e-12)
        throw ArgumentError("reconstruct_full: grid mismatch");
    Vector out(hyp.xgrid.size());
    for (Index i = 0; i < out.size(); ++i)
        out(i) = hyp.u(i) + sample_profile(layerV, hyp.xgrid(i) / eps) +
                 state.w(i);
    return out;
}

double residual_full(const FluxModel& model, const std::vector<Vector>& fields,
                     const Vector& tgrid, double h, double eps, double xmin,
                     double xmax) {
    if (fields.size() < 3)
        throw ArgumentError("residual_full: need at least 3 snapshots");
    if (static_cast<Index>(fields.size()) != tgrid.size())
        throw ArgumentError("residual_full: snapshot/time count mismatch");
    require_uniform_x(tgrid, "residual_full");
    const double dt = tgrid(1) - tgrid(0);
    const Index n = fields[0].size();

    double worst = 0.0;
    for (size_t k = 1; k + 1 < fields.size(); ++k) {
        Vector fu(n);
        for (Index i = 0; i < n; ++i) fu(i) = model.eval(fields[k](i), 0);
        const Vector fx = diff1(fu, h);
        const Vector uxxx = diff3(fields[k], h);
        for (Index i = 2; i + 2 < n; ++i) {
            const double x = h * static_cast<double>(i);
            if (x < xmin || x > xmax) continue;
            const double ut =
                (fields[k + 1](i) - fields[k - 1](i)) / (2.0 * dt);
            worst = std::max(
                std::abs(ut + fx(i) + eps * eps * uxxx(i)), worst);
        }
    }
    return worst;
}

}  // namespace kbl
