#include "kbl/layer.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "kbl/gridops.hpp"

namespace kbl {

namespace {

// dV/dy = sign * sqrt(-2 F(u0, V)). F <= 0 for an admissible model; a
// positive F beyond roundoff means the model violates the hypothesis.
double reduced_rhs(const FluxModel& model, double u0, double V, double sign) {
    const double F = potential_F(model, u0, V);
    if (F > 1e-14 * (1.0 + V * V))
        throw ModelConsistencyError(
            "solve_profile: positive layer potential encountered");
    return sign * std::sqrt(std::max(0.0, -2.0 * F));
}

// Cash-Karp 4(5) embedded pair, scalar state, adaptive step.
double integrate_to(const FluxModel& model, double u0, double sign, double v,
                    double y_from, double y_to, double rtol, double atol) {
    static const double a2 = 1.0 / 5, a3 = 3.0 / 10, a4 = 3.0 / 5, a5 = 1.0,
                        a6 = 7.0 / 8;
    static const double b21 = 1.0 / 5;
    static const double b31 = 3.0 / 40, b32 = 9.0 / 40;
    static const double b41 = 3.0 / 10, b42 = -9.0 / 10, b43 = 6.0 / 5;
    static const double b51 = -11.0 / 54, b52 = 5.0 / 2, b53 = -70.0 / 27,
                        b54 = 35.0 / 27;
    static const double b61 = 1631.0 / 55296, b62 = 175.0 / 512,
                        b63 = 575.0 / 13824, b64 = 44275.0 / 110592,
                        b65 = 253.0 / 4096;
    static const double c1 = 37.0 / 378, c3 = 250.0 / 621, c4 = 125.0 / 594,
                        c6 = 512.0 / 1771;
    static const double d1 = c1 - 2825.0 / 27648, d3 = c3 - 18575.0 / 48384,
                        d4 = c4 - 13525.0 / 55296, d5 = -277.0 / 14336,
                        d6 = c6 - 0.25;
    (void)a2; (void)a3; (void)a4; (void)a5; (void)a6;  // autonomous RHS

    double y = y_from;
    double h = std::min(0.1, y_to - y_from);
    if (h <= 0.0) return v;
    int guard = 0;
    while (y < y_to) {
        if (++guard > 2000000)
            throw ModelConsistencyError("solve_profile: step count exceeded");
        if (y + h > y_to) h = y_to - y;
        auto f = [&](double vv) { return reduced_rhs(model, u0, vv, sign); };
        const double k1 = f(v);
        const double k2 = f(v + h * b21 * k1);
        const double k3 = f(v + h * (b31 * k1 + b32 * k2));
        const double k4 = f(v + h * (b41 * k1 + b42 * k2 + b43 * k3));
        const double k5 =
            f(v + h * (b51 * k1 + b52 * k2 + b53 * k3 + b54 * k4));
        const double k6 = f(
            v + h * (b61 * k1 + b62 * k2 + b63 * k3 + b64 * k4 + b65 * k5));
        const double v5 = v + h * (c1 * k1 + c3 * k3 + c4 * k4 + c6 * k6);
        const double err = std::abs(
            h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6));
        const double tol = atol + rtol * std::abs(v5);
        if (err <= tol) {
            y += h;
            v = v5;
            if (std::abs(v) < 1e-300) return 0.0;  // fully decayed
        }
        const double factor =
            err > 0.0 ? 0.9 * std::pow(tol / err, 0.2) : 5.0;
        h *= std::clamp(factor, 0.2, 5.0);
        h = std::max(h, 1e-12);
    }
    return v;
}

void require_uniform(const Vector& ygrid, const char* who) {
    if (ygrid.size() < 3)
        throw ArgumentError(std::string(who) + ": need at least 3 points");
    const double h = ygrid(1) - ygrid(0);
    for (Index i = 1; i + 1 < ygrid.size(); ++i)
        if (std::abs((ygrid(i + 1) - ygrid(i)) - h) > 1e-9 * h)
            throw ArgumentError(std::string(who) + ": grid must be uniform");
}

double try_fit(const LayerProfile& p) {
    try {
        return fit_decay_rate(p);
    } catch (const DegenerateFitError&) {
        return 0.0;
    }
}

}  // namespace

Vector make_fast_grid(const FluxModel& model, double hy) {
    const double ymax = 40.0 / std::sqrt(model.c());
    const Index n = static_cast<Index>(std::ceil(ymax / hy));
    return Vector::LinSpaced(n + 1, 0.0, ymax);
}

LayerProfile solve_profile(const FluxModel& model, double u0, double Vbar,
                           const Vector& ygrid) {
    if (ygrid.size() < 1 || ygrid(0) != 0.0)
        throw ArgumentError("solve_profile: ygrid must start at 0");
    model.require_segment(u0, u0 + Vbar, "solve_profile");

    LayerProfile p;
    p.u0 = u0;
    p.Vbar = Vbar;
    p.ygrid = ygrid;
    p.values.resize(ygrid.size());
    p.kind = LayerKind::V;

    if (Vbar == 0.0) {
        p.values.setZero();
        return p;
    }
    const double sign = Vbar <= 0.0 ? 1.0 : -1.0;
    double v = Vbar;
    p.values(0) = v;
    const double atol = 1e-14 * std::abs(Vbar);
    for (Index i = 1; i < ygrid.size(); ++i) {
        v = integrate_to(model, u0, sign, v, ygrid(i - 1), ygrid(i), 1e-10,
                         atol);
        p.values(i) = v;
    }
    p.decay_rate = try_fit(p);
    return p;
}

Vector profile_slope(const FluxModel& model, const LayerProfile& profile) {
    if (profile.kind != LayerKind::V)
        throw ArgumentError("profile_slope: kind V required");
    const double sign = profile.Vbar <= 0.0 ? 1.0 : -1.0;
    Vector out(profile.values.size());
    for (Index i = 0; i < out.size(); ++i) {
        const double F = potential_F(model, profile.u0, profile.values(i));
        out(i) = sign * std::sqrt(std::max(0.0, -2.0 * F));
    }
    return out;
}

double profile_residual(const FluxModel& model, const LayerProfile& profile) {
    if (profile.kind != LayerKind::V)
        throw ArgumentError("profile_residual: kind V required");
    if (profile.ygrid.size() < 3)
        throw ArgumentError("profile_residual: need at least 3 grid points");
    require_uniform(profile.ygrid, "profile_residual");
    const double h = profile.ygrid(1) - profile.ygrid(0);
    const double fu0 = model.eval(profile.u0, 0);
    double worst = 0.0;
    for (Index i = 1; i + 1 < profile.values.size(); ++i) {
        const double d2 = (profile.values(i + 1) - 2.0 * profile.values(i) +
                           profile.values(i - 1)) /
                          (h * h);
        const double r =
            model.eval(profile.u0 + profile.values(i), 0) - fu0 + d2;
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

LayerProfile solve_layer_derivative(const FluxModel& model,
                                    const LayerProfile& baseV,
                                    const Vector& source, double wall_value,
                                    LayerKind kind) {
    if (baseV.kind != LayerKind::V)
        throw ArgumentError("solve_layer_derivative: base must be kind V");
    require_uniform(baseV.ygrid, "solve_layer_derivative");
    if (source.size() != baseV.ygrid.size())
        throw ArgumentError("solve_layer_derivative: source size mismatch");

    const Index n = baseV.ygrid.size();
    const double h = baseV.ygrid(1) - baseV.ygrid(0);
    const double h2 = h * h;

    // Interior unknowns 1..n-2; Z(0) = wall, Z(n-1) = 0 at the truncated
    // far end (decay makes the truncation error below solver tolerance).
    const Index m = n - 2;
    Vector lo(m), di(m), up(m), rhs(m);
    for (Index k = 0; k < m; ++k) {
        const Index i = k + 1;
        const double fp = model.eval(baseV.u0 + baseV.values(i), 1);
        if (!(fp < 0.0))
            throw ModelConsistencyError(
                "solve_layer_derivative: operator not negative definite");
        lo(k) = 1.0 / h2;
        di(k) = fp - 2.0 / h2;
        up(k) = 1.0 / h2;
        rhs(k) = -source(i);
    }
    rhs(0) -= wall_value / h2;

    LayerProfile z;
    z.u0 = baseV.u0;
    z.Vbar = baseV.Vbar;
    z.ygrid = baseV.ygrid;
    z.kind = kind;
    z.values.resize(n);
    z.values(0) = wall_value;
    z.values(n - 1) = 0.0;
    z.values.segment(1, m) = solve_tridiagonal(lo, di, up, rhs);
    z.decay_rate = try_fit(z);
    return z;
}

LayerProfile solve_dtV(const FluxModel& model, double u0, double du0,
                       double wall_value, const LayerProfile& baseV) {
    Vector source(baseV.ygrid.size());
    const double fpu0 = model.eval(u0, 1);
    for (Index i = 0; i < source.size(); ++i)
        source(i) = (model.eval(u0 + baseV.values(i), 1) - fpu0) * du0;
    return solve_layer_derivative(model, baseV, source, wall_value,
                                  LayerKind::dtV);
}

// Sources for the higher t-derivatives come from differentiating
//   [f'(u0+V) - f'(u0)] u0' + f'(u0+V) Vt + Vt'' = 0
// in t, with d/dt f^(k)(u0+V) = f^(k+1)(u0+V) (u0' + Vt) and
// d/dt f^(k)(u0) = f^(k+1)(u0) u0'. All terms written out explicitly.
LayerProfile solve_dttV(const FluxModel& model, double u0, double du0,
                        double ddu0, double wall_value,
                        const LayerProfile& baseV, const LayerProfile& dtV) {
    if (dtV.kind != LayerKind::dtV)
        throw ArgumentError("solve_dttV: second profile must be kind dtV");
    const Index n = baseV.ygrid.size();
    Vector source(n);
    const double fp0 = model.eval(u0, 1);
    const double fpp0 = model.eval(u0, 2);
    for (Index i = 0; i < n; ++i) {
        const double a = u0 + baseV.values(i);
        const double z1 = dtV.values(i);
        const double fpa = model.eval(a, 1);
        const double fppa = model.eval(a, 2);
        source(i) = (fppa - fpp0) * du0 * du0      // d/dt of the bracket
                    + 2.0 * fppa * du0 * z1        // cross terms
                    + (fpa - fp0) * ddu0           // bracket times u0''
                    + fppa * z1 * z1;              // from f'(u0+V) Vt
    }
    return solve_layer_derivative(model, baseV, source, wall_value,
                                  LayerKind::dttV);
}

LayerProfile solve_dtttV(const FluxModel& model, double u0, double du0,
                         double ddu0, double dddu0, double wall_value,
                         const LayerProfile& baseV, const LayerProfile& dtV,
                         const LayerProfile& dttV) {
    if (dtV.kind != LayerKind::dtV || dttV.kind != LayerKind::dttV)
        throw ArgumentError("solve_dtttV: wrong profile kinds");
    const Index n = baseV.ygrid.size();
    Vector source(n);
    const double fp0 = model.eval(u0, 1);
    const double fpp0 = model.eval(u0, 2);
    const double fppp0 = model.eval(u0, 3);
    for (Index i = 0; i < n; ++i) {
        const double a = u0 + baseV.values(i);
        const double z1 = dtV.values(i);
        const double z2 = dttV.values(i);
        const double fpa = model.eval(a, 1);
        const double fppa = model.eval(a, 2);
        const double fpppa = model.eval(a, 3);
        const double adot = du0 + z1;  // d/dt (u0 + V)
        source(i) =
            (fpppa * adot - fppp0 * du0) * du0 * du0 +
            2.0 * (fppa - fpp0) * du0 * ddu0 +
            2.0 * (fpppa * adot * du0 * z1 + fppa * (ddu0 * z1 + du0 * z2)) +
            (fppa * adot - fpp0 * du0) * ddu0 + (fpa - fp0) * dddu0 +
            fpppa * adot * z1 * z1 + 2.0 * fppa * z1 * z2 +
            fppa * adot * z2;
    }
    return solve_layer_derivative(model, baseV, source, wall_value,
                                  LayerKind::dtttV);
}

double fit_decay_rate(const LayerProfile& profile) {
    const Vector& v = profile.values;
    const Vector& y = profile.ygrid;
    const double vmax = v.cwiseAbs().maxCoeff();
    if (vmax <= 1e-13)
        throw DegenerateFitError("fit_decay_rate: profile numerically zero");

    // Tail window: decayed by 1e-3 relative to the peak but still above
    // the noise floor. Fall back to the last valid decade if thin.
    std::vector<Index> idx;
    for (Index i = 0; i < v.size(); ++i) {
        const double a = std::abs(v(i));
        if (a > 1e-13 && a <= vmax * 1e-3) idx.push_back(i);
    }
    if (idx.size() < 10) {
        idx.clear();
        for (Index i = 0; i < v.size(); ++i)
            if (std::abs(v(i)) > 1e-13) idx.push_back(i);
        if (idx.size() < 10)
            throw DegenerateFitError(
                "fit_decay_rate: fewer than 10 usable points");
        if (idx.size() > 10) idx.erase(idx.begin(), idx.end() - 10);
    }

    double sy = 0, sl = 0, syy = 0, syl = 0;
    for (Index i : idx) {
        const double yy = y(i), ll = std::log(std::abs(v(i)));
        sy += yy;
        sl += ll;
        syy += yy * yy;
        syl += yy * ll;
    }
    const double n = static_cast<double>(idx.size());
    const double denom = n * syy - sy * sy;
    if (denom <= 0.0)
        throw DegenerateFitError("fit_decay_rate: degenerate abscissae");
    const double slope = (n * syl - sy * sl) / denom;
    return -slope;
}

}  // namespace kbl
