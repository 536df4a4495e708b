#pragma once

#include "kbl/flux.hpp"
#include "kbl/types.hpp"

namespace kbl {

/// Which member of the layer family a profile represents.
enum class LayerKind { V, dtV, dttV, dtttV };

/// A boundary-layer profile (or one of its time derivatives) sampled on a
/// fast-variable grid starting at y = 0.
struct LayerProfile {
    double u0 = 0.0;    // outer trace at the wall
    double Vbar = 0.0;  // wall mismatch u_b - u0 (kind V only)
    Vector ygrid;
    Vector values;
    double decay_rate = 0.0;  // fitted exponential rate, 0 if degenerate
    LayerKind kind = LayerKind::V;
};

/// Uniform fast grid [0, 40/sqrt(c)] with spacing at most hy. The upper end
/// is where every layer quantity has decayed below solver tolerance.
Vector make_fast_grid(const FluxModel& model, double hy);

/// Integrates the reduced first-order equation
///   dV/dy = +sqrt(-2 F(u0, V))  (Vbar <= 0),
///   dV/dy = -sqrt(-2 F(u0, V))  (Vbar > 0)
/// with an adaptive embedded RK pair at relative tolerance 1e-10.
LayerProfile solve_profile(const FluxModel& model, double u0, double Vbar,
                           const Vector& ygrid);

/// dV/dy from the first-integral identity F + (dV/dy)^2/2 = 0; exact on the
/// profile, no grid differencing.
Vector profile_slope(const FluxModel& model, const LayerProfile& profile);

/// max over interior points of |f(u0+V) - f(u0) + D^2 V|, certifying the
/// second-order form of the layer equation.
double profile_residual(const FluxModel& model, const LayerProfile& profile);

/// Solves the linear elliptic problem
///   f'(u0 + V) Z + Z'' = -source,  Z(0) = wall_value,  Z(Ymax) = 0
/// on the (uniform) grid of baseV. The operator is uniformly negative
/// definite because f' <= -c, so the tridiagonal solve cannot fail for an
/// admissible model.
LayerProfile solve_layer_derivative(const FluxModel& model,
                                    const LayerProfile& baseV,
                                    const Vector& source, double wall_value,
                                    LayerKind kind);

/// First t-derivative: source [f'(u0+V) - f'(u0)] * du0.
LayerProfile solve_dtV(const FluxModel& model, double u0, double du0,
                       double wall_value, const LayerProfile& baseV);

/// Second t-derivative; source assembled by product/chain-rule expansion of
/// the once-differentiated profile equation (see layer.cpp).
LayerProfile solve_dttV(const FluxModel& model, double u0, double du0,
                        double ddu0, double wall_value,
                        const LayerProfile& baseV, const LayerProfile& dtV);

/// Third t-derivative, same construction one order up.
LayerProfile solve_dtttV(const FluxModel& model, double u0, double du0,
                         double ddu0, double dddu0, double wall_value,
                         const LayerProfile& baseV, const LayerProfile& dtV,
                         const LayerProfile& dttV);

/// Least-squares slope of log|values| vs y over the decayed tail.
/// Throws DegenerateFitError for numerically zero profiles.
double fit_decay_rate(const LayerProfile& profile);

}  // namespace kbl
