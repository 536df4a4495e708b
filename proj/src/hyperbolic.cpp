#include "kbl/hyperbolic.hpp"

#include <algorithm>
#include <cmath>

namespace kbl {

namespace {

constexpr int kNewtonMaxIter = 50;
constexpr double kNewtonTol = 1e-13;
constexpr double kDenomFloor = 0.05;

// Newton solve of u = u_in(x - f'(u) t) from the given initial guess.
double newton_state(const FluxModel& model, const SmoothFn& u_in, double t,
                    double x, double guess) {
    // Iterates are projected into the (open) admissible interval: an
    // intermediate overshoot is harmless as long as the converged state
    // lies inside.
    const Interval& J = model.admissible();
    const double pad = 1e-12 * J.width();
    double u = std::clamp(guess, J.lo + pad, J.hi - pad);
    for (int it = 0; it < kNewtonMaxIter; ++it) {
        const double foot = x - model.eval(u, 1) * t;
        const double r = u - u_in.eval(foot, 0);
        if (std::abs(r) <= kNewtonTol * (1.0 + std::abs(u))) {
            const double denom =
                1.0 + t * model.eval(u, 2) * u_in.eval(foot, 1);
            if (denom <= kDenomFloor)
                throw NearBlowupError(
                    "solve_characteristics: characteristic compression near "
                    "gradient blow-up");
            return u;
        }
        const double drdu = 1.0 + t * model.eval(u, 2) * u_in.eval(foot, 1);
        if (std::abs(drdu) < 1e-14)
            throw LifespanError(
                "solve_characteristics: singular Newton iteration");
        u = std::clamp(u - r / drdu, J.lo + pad, J.hi - pad);
    }
    throw LifespanError(
        "solve_characteristics: Newton failed to converge (time beyond the "
        "smooth lifespan?)");
}

}  // namespace

double estimate_lifespan(const FluxModel& model, const SmoothFn& u_in,
                         double sample_length, double cap) {
    const int n = 20000;
    double worst = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double x0 = sample_length * static_cast<double>(i) / n;
        const double u = u_in.eval(x0, 0);
        model.require_in_range(u, "estimate_lifespan");
        // -d/dx0 f'(u_in(x0))
        const double comp = -model.eval(u, 2) * u_in.eval(x0, 1);
        worst = std::max(worst, comp);
    }
    if (worst <= 0.0) return cap;
    return std::min(cap, 0.9 / worst);
}

HyperbolicField solve_characteristics(const FluxModel& model,
                                      const SmoothFn& u_in, double t,
                                      const Vector& xgrid) {
    HyperbolicField fld;
    fld.t = t;
    fld.xgrid = xgrid;
    const Index n = xgrid.size();
    fld.u.resize(n);
    fld.ux.resize(n);
    fld.uxx.resize(n);
    fld.uxxx.resize(n);
    fld.ut.resize(n);
    fld.utx.resize(n);

    double guess = u_in.eval(xgrid.size() ? xgrid(0) : 0.0, 0);
    for (Index i = 0; i < n; ++i) {
        const double x = xgrid(i);
        const double u = newton_state(model, u_in, t, x, guess);
        guess = u;  // continuation along the sweep

        const double foot = x - model.eval(u, 1) * t;
        const double p = u_in.eval(foot, 1);
        const double q = u_in.eval(foot, 2);
        const double r = u_in.eval(foot, 3);
        const double fp = model.eval(u, 1);
        const double fpp = model.eval(u, 2);
        const double fppp = model.eval(u, 3);
        const double f4 = model.eval4(u);
        const double D = 1.0 + t * fpp * p;
        if (D <= kDenomFloor)
            throw NearBlowupError(
                "solve_characteristics: derivative denominator below floor");

        const double ux = p / D;
        const double N = q - t * fppp * p * p * p;
        const double uxx = N / (D * D * D);
        const double E = t * (fppp * p * p + fpp * q);
        const double uxxx =
            (r - t * f4 * p * p * p * p - 3.0 * t * fppp * p * p * q -
             3.0 * N * E / D) /
            (D * D * D * D);

        fld.u(i) = u;
        fld.ux(i) = ux;
        fld.uxx(i) = uxx;
        fld.uxxx(i) = uxxx;
        fld.ut(i) = -fp * ux;
        fld.utx(i) = -fpp * ux * ux - fp * uxx;
    }
    return fld;
}

BoundaryTrace boundary_trace(const FluxModel& model, const SmoothFn& u_in,
                             const Vector& tgrid) {
    BoundaryTrace tr;
    tr.tgrid = tgrid;
    const Index n = tgrid.size();
    tr.u0.resize(n);
    tr.du0.resize(n);
    tr.ddu0.resize(n);
    tr.dddu0.resize(n);

    double guess = u_in.eval(0.0, 0);
    for (Index i = 0; i < n; ++i) {
        const double t = tgrid(i);
        const double u0 = newton_state(model, u_in, t, 0.0, guess);
        guess = u0;

        const double foot = -model.eval(u0, 1) * t;
        const double p = u_in.eval(foot, 1);
        const double q = u_in.eval(foot, 2);
        const double r = u_in.eval(foot, 3);
        const double fp = model.eval(u0, 1);
        const double fpp = model.eval(u0, 2);
        const double fppp = model.eval(u0, 3);
        const double f4 = model.eval4(u0);
        const double D = 1.0 + t * fpp * p;
        if (D <= kDenomFloor)
            throw NearBlowupError(
                "boundary_trace: derivative denominator below floor");

        // Implicit differentiation of u0(t) = u_in(phi(t)),
        // phi(t) = -f'(u0(t)) t.
        const double du0 = -p * fp / D;
        const double dphi = -fpp * du0 * t - fp;
        const double ddu0 =
            (q * dphi * dphi - p * t * fppp * du0 * du0 -
             2.0 * p * fpp * du0) /
            D;
        const double ddphi = -fppp * du0 * du0 * t - fpp * ddu0 * t -
                             2.0 * fpp * du0;
        const double dddu0 =
            (r * dphi * dphi * dphi + 3.0 * q * dphi * ddphi -
             p * (t * f4 * du0 * du0 * du0 +
                  3.0 * t * fppp * du0 * ddu0 + 3.0 * fppp * du0 * du0 +
                  3.0 * fpp * ddu0)) /
            D;

        tr.u0(i) = u0;
        tr.du0(i) = du0;
        tr.ddu0(i) = ddu0;
        tr.dddu0(i) = dddu0;
    }
    return tr;
}

CompatibilityReport validate_compatibility(const SmoothFn& u_in,
                                           const SmoothFn& u_b, double tol) {
    CompatibilityReport rep;
    rep.tolerance = tol;
    rep.values_match = std::abs(u_b.eval(0.0, 0) - u_in.eval(0.0, 0)) <= tol;
    rep.uin_xxx_zero = std::abs(u_in.eval(0.0, 3)) <= tol;
    rep.uin_x_zero = std::abs(u_in.eval(0.0, 1)) <= tol;
    rep.ub_t_zero = std::abs(u_b.eval(0.0, 1)) <= tol;
    return rep;
}

}  // namespace kbl
