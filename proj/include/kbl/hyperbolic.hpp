#pragma once

#include "kbl/datum.hpp"
#include "kbl/flux.hpp"
#include "kbl/types.hpp"

namespace kbl {

/// Smooth conservation-law solution and its derivatives on a space grid at
/// one time, computed by the method of characteristics.
struct HyperbolicField {
    double t = 0.0;
    Vector xgrid;
    Vector u;
    Vector ux, uxx, uxxx;
    Vector ut, utx;
};

/// Trace of the hyperbolic solution along the wall x = 0 with its first
/// three time derivatives.
struct BoundaryTrace {
    Vector tgrid;
    Vector u0, du0, ddu0, dddu0;
};

struct CompatibilityReport {
    bool values_match = false;      // u_b(0) = u_in(0)
    bool uin_xxx_zero = false;      // u_in'''(0) = 0
    bool uin_x_zero = false;        // u_in'(0) = 0
    bool ub_t_zero = false;         // u_b'(0) = 0
    double tolerance = 1e-10;
    bool all() const {
        return values_match && uin_xxx_zero && uin_x_zero && ub_t_zero;
    }
};

/// Classical gradient-blow-up surrogate for the smooth lifespan:
/// 0.9 / sup_x0 max(0, -d/dx0 f'(u_in(x0))), capped at `cap` when the data
/// never compress. Sampled densely on [0, sample_length].
double estimate_lifespan(const FluxModel& model, const SmoothFn& u_in,
                         double sample_length = 60.0, double cap = 1e3);

/// Solves u = u_in(x - f'(u) t) pointwise by Newton continuation along the
/// grid; derivatives up to uxxx by implicit differentiation.
HyperbolicField solve_characteristics(const FluxModel& model,
                                      const SmoothFn& u_in, double t,
                                      const Vector& xgrid);

/// u(t,0) and its first three time derivatives along x = 0.
BoundaryTrace boundary_trace(const FluxModel& model, const SmoothFn& u_in,
                             const Vector& tgrid);

/// Corner conditions at (t,x) = (0,0) required for a layer without an
/// initial transient.
CompatibilityReport validate_compatibility(const SmoothFn& u_in,
                                           const SmoothFn& u_b,
                                           double tol = 1e-10);

}  // namespace kbl
