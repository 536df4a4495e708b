#pragma once

#include "kbl/types.hpp"

namespace kbl {

/// Composite trapezoid rule on a uniform grid with spacing h.
inline double trapz(const Vector& v, double h) {
    if (v.size() < 2) return 0.0;
    return h * (v.sum() - 0.5 * (v(0) + v(v.size() - 1)));
}

/// Cumulative trapezoid integral from the left endpoint, result(0) = 0.
inline Vector cumtrapz(const Vector& v, double h) {
    Vector out(v.size());
    out(0) = 0.0;
    for (Index i = 1; i < v.size(); ++i)
        out(i) = out(i - 1) + 0.5 * h * (v(i - 1) + v(i));
    return out;
}

/// Second-order first derivative: centered interior, one-sided at the ends.
inline Vector diff1(const Vector& v, double h) {
    const Index n = v.size();
    Vector out(n);
    if (n < 3) {
        out.setZero();
        if (n == 2) out(0) = out(1) = (v(1) - v(0)) / h;
        return out;
    }
    out(0) = (-3.0 * v(0) + 4.0 * v(1) - v(2)) / (2.0 * h);
    for (Index i = 1; i + 1 < n; ++i) out(i) = (v(i + 1) - v(i - 1)) / (2.0 * h);
    out(n - 1) = (3.0 * v(n - 1) - 4.0 * v(n - 2) + v(n - 3)) / (2.0 * h);
    return out;
}

/// Second-order second derivative, one-sided closures at the ends.
inline Vector diff2(const Vector& v, double h) {
    const Index n = v.size();
    Vector out(n);
    const double h2 = h * h;
    if (n < 4) {
        out.setZero();
        return out;
    }
    out(0) = (2.0 * v(0) - 5.0 * v(1) + 4.0 * v(2) - v(3)) / h2;
    for (Index i = 1; i + 1 < n; ++i)
        out(i) = (v(i + 1) - 2.0 * v(i) + v(i - 1)) / h2;
    out(n - 1) =
        (2.0 * v(n - 1) - 5.0 * v(n - 2) + 4.0 * v(n - 3) - v(n - 4)) / h2;
    return out;
}

/// Second-order third derivative (centered 5-point interior, shifted stencils
/// near the ends). Used for diagnostics only, not by the time stepper.
inline Vector diff3(const Vector& v, double h) {
    const Index n = v.size();
    Vector out(n);
    const double h3 = h * h * h;
    if (n < 6) {
        out.setZero();
        return out;
    }
    auto left = [&](Index i) {
        // 5-point one-sided, second order
        return (-2.5 * v(i) + 9.0 * v(i + 1) - 12.0 * v(i + 2) +
                7.0 * v(i + 3) - 1.5 * v(i + 4)) / h3;
    };
    auto right = [&](Index i) {
        return (2.5 * v(i) - 9.0 * v(i - 1) + 12.0 * v(i - 2) -
                7.0 * v(i - 3) + 1.5 * v(i - 4)) / h3;
    };
    out(0) = left(0);
    out(1) = left(1);
    for (Index i = 2; i + 2 < n; ++i)
        out(i) = (-0.5 * v(i - 2) + v(i - 1) - v(i + 1) + 0.5 * v(i + 2)) / h3;
    out(n - 2) = right(n - 2);
    out(n - 1) = right(n - 1);
    return out;
}

/// Thomas algorithm for a tridiagonal system. Diagonals are passed as
/// vectors of equal length n; lower(0) and upper(n-1) are ignored.
/// The system must not require pivoting (true for the uniformly
/// negative-definite operators solved here).
inline Vector solve_tridiagonal(const Vector& lower, const Vector& diag,
                                const Vector& upper, const Vector& rhs) {
    const Index n = diag.size();
    if (lower.size() != n || upper.size() != n || rhs.size() != n)
        throw ArgumentError("solve_tridiagonal: size mismatch");
    Vector c(n), d(n);
    double den = diag(0);
    if (den == 0.0) throw ArgumentError("solve_tridiagonal: zero pivot");
    c(0) = upper(0) / den;
    d(0) = rhs(0) / den;
    for (Index i = 1; i < n; ++i) {
        den = diag(i) - lower(i) * c(i - 1);
        if (den == 0.0) throw ArgumentError("solve_tridiagonal: zero pivot");
        c(i) = upper(i) / den;
        d(i) = (rhs(i) - lower(i) * d(i - 1)) / den;
    }
    Vector x(n);
    x(n - 1) = d(n - 1);
    for (Index i = n - 2; i >= 0; --i) x(i) = d(i) - c(i) * x(i + 1);
    return x;
}

}  // namespace kbl
