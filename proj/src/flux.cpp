#include "kbl/flux.hpp"

#include <cmath>
#include <limits>

namespace kbl {

namespace {

constexpr int kRangeSamples = 4096;

// Adaptive Simpson quadrature, used when no primitive is registered.
double simpson(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double fa, double b, double fb, double m, double fm,
                        double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(a, fa, m, fm, flm);
    const double right = simpson(m, fm, b, fb, frm);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson(f, a, fa, m, fm, lm, flm, left, 0.5 * tol,
                            depth - 1) +
           adaptive_simpson(f, m, fm, b, fb, rm, frm, right, 0.5 * tol,
                            depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol) {
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    const double whole = simpson(a, fa, b, fb, fm);
    return adaptive_simpson(f, a, fa, b, fb, m, fm, whole, tol, 40);
}

}  // namespace

FluxModel::FluxModel(ScalarFn f, ScalarFn fp, ScalarFn fpp, ScalarFn fppp,
                     Interval J, ScalarFn antiderivative, ScalarFn fourth)
    : F0_(std::move(antiderivative)), d4_(std::move(fourth)), J_(J) {
    d_[0] = std::move(f);
    d_[1] = std::move(fp);
    d_[2] = std::move(fpp);
    d_[3] = std::move(fppp);
    if (!(J_.lo < J_.hi))
        throw ArgumentError("FluxModel: admissible interval is empty");

    // f' <= -c < 0 on a dense sample of J; c is the sampled lower bound
    // on -f'. J is open, so the sample stays strictly interior.
    double cmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < kRangeSamples; ++i) {
        const double u = J_.lo + (J_.hi - J_.lo) *
                                     (static_cast<double>(i) + 0.5) /
                                     kRangeSamples;
        cmin = std::min(cmin, -d_[1](u));
    }
    if (!(cmin > 0.0))
        throw ModelConsistencyError(
            "FluxModel: f' is not bounded away from 0 on J (outflow "
            "hypothesis violated)");
    c_ = cmin;

    // Derivative consistency: central differences must match the supplied
    // derivatives to O(h^2) on a coarse sample.
    const double h = 1e-5 * std::max(1.0, J_.width());
    for (int i = 1; i < 16; ++i) {
        const double u = J_.lo + (J_.hi - J_.lo) * i / 16.0;
        if (u - h <= J_.lo || u + h >= J_.hi) continue;
        for (int k = 0; k < 3; ++k) {
            const double fd = (d_[k](u + h) - d_[k](u - h)) / (2.0 * h);
            const double scale =
                std::max({1.0, std::abs(d_[k + 1](u)), std::abs(fd)});
            if (std::abs(fd - d_[k + 1](u)) > 1e-6 * scale)
                throw ModelConsistencyError(
                    "FluxModel: supplied derivative of order " +
                    std::to_string(k + 1) +
                    " disagrees with finite differences of order " +
                    std::to_string(k));
        }
    }
}

void FluxModel::require_in_range(double u, const char* who) const {
    if (!J_.contains(u))
        throw AdmissibleRangeError(std::string(who) + ": state " +
                                   std::to_string(u) +
                                   " outside the admissible interval");
}

void FluxModel::require_segment(double a, double b, const char* who) const {
    require_in_range(std::min(a, b), who);
    require_in_range(std::max(a, b), who);
}

double FluxModel::eval(double u, int order) const {
    if (order < 0 || order > 3)
        throw ArgumentError("eval_flux: derivative order must be in 0..3");
    require_in_range(u, "eval_flux");
    return d_[order](u);
}

double FluxModel::eval4(double u) const {
    require_in_range(u, "eval_flux");
    return d4_ ? d4_(u) : 0.0;
}

double FluxModel::antiderivative(double u) const {
    if (!F0_) throw ArgumentError("FluxModel: no antiderivative registered");
    return F0_(u);
}

double potential_F(const FluxModel& model, double u0, double V) {
    model.require_segment(u0, u0 + V, "potential_F");
    if (V == 0.0) return 0.0;
    // Taylor branch near V = 0: the antiderivative/quadrature paths lose
    // all significant digits there (F = O(V^2) from O(1) differences).
    if (std::abs(V) <= 1e-4 * (1.0 + std::abs(u0))) {
        return V * V *
               (0.5 * model.eval(u0, 1) + model.eval(u0, 2) * V / 6.0 +
                model.eval(u0, 3) * V * V / 24.0 +
                model.eval4(u0) * V * V * V / 120.0);
    }
    if (model.has_antiderivative()) {
        return model.antiderivative(u0 + V) - model.antiderivative(u0) -
               model.eval(u0, 0) * V;
    }
    auto integrand = [&](double s) {
        return model.eval(u0 + s, 0) - model.eval(u0, 0);
    };
    return integrate(integrand, 0.0, V, 1e-14);
}

double taylor_g(const FluxModel& model, double a, double w) {
    model.require_segment(a, a + w, "taylor_g");
    // Exact quotient away from w = 0; three-term series inside the
    // cancellation zone.
    const double delta = std::cbrt(std::numeric_limits<double>::epsilon()) *
                         (1.0 + std::abs(a));
    if (std::abs(w) <= delta)
        return 0.5 * model.eval(a, 2) + model.eval(a, 3) * w / 6.0;
    return (model.eval(a + w, 0) - model.eval(a, 0) - model.eval(a, 1) * w) /
           (w * w);
}

double mismatch_H(const FluxModel& model, double u, double V, double u0) {
    model.require_in_range(u, "mismatch_H");
    model.require_in_range(u0, "mismatch_H");
    model.require_in_range(u + V, "mismatch_H");
    model.require_in_range(u0 + V, "mismatch_H");
    return model.eval(u + V, 0) - model.eval(u, 0) - model.eval(u0 + V, 0) +
           model.eval(u0, 0);
}

FluxModel make_flux(const std::string& name,
                    const std::map<std::string, double>& params) {
    auto get = [&](const std::string& key, double fallback) {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    };
    if (name == "linear") {
        const double k = get("k", 1.0);
        if (!(k > 0.0)) throw ArgumentError("linear flux: k must be > 0");
        Interval J{get("jlo", -10.0), get("jhi", 10.0)};
        return FluxModel([k](double u) { return -k * u; },
                         [k](double) { return -k; },
                         [](double) { return 0.0; },
                         [](double) { return 0.0; }, J,
                         [k](double u) { return -0.5 * k * u * u; });
    }
    if (name == "quadratic") {
        const double k = get("k", 3.0);
        Interval J{get("jlo", -1.6), get("jhi", -0.8)};
        return FluxModel([k](double u) { return k * u * u; },
                         [k](double u) { return 2.0 * k * u; },
                         [k](double) { return 2.0 * k; },
                         [](double) { return 0.0; }, J,
                         [k](double u) { return k * u * u * u / 3.0; });
    }
    if (name == "cubic-perturbed") {
        const double k = get("k", 3.0);
        const double b = get("b", 0.2);
        Interval J{get("jlo", -1.6), get("jhi", -0.8)};
        return FluxModel(
            [k, b](double u) { return k * u * u + b * u * u * u; },
            [k, b](double u) { return 2.0 * k * u + 3.0 * b * u * u; },
            [k, b](double u) { return 2.0 * k + 6.0 * b * u; },
            [b](double) { return 6.0 * b; }, J,
            [k, b](double u) {
                return k * u * u * u / 3.0 + 0.25 * b * u * u * u * u;
            });
    }
    throw ArgumentError("make_flux: unknown flux '" + name + "'");
}

}  // namespace kbl
