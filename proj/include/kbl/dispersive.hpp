#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <limits>
#include <string>
#include <vector>

#include "kbl/datum.hpp"
#include "kbl/flux.hpp"
#include "kbl/hyperbolic.hpp"
#include "kbl/layer.hpp"
#include "kbl/types.hpp"

namespace kbl {

/// Remainder w on the uniform grid over [0, L] at one time, together with
/// its spatial anti-derivative W (cumulative integral from 0).
struct RemainderState {
    double t = 0.0;
    Vector xgrid;
    Vector w;
    Vector W;
};

/// The two source terms of the remainder equation: the interior dispersion
/// of the smooth field and the boundary-layer commutator.
struct SourcePair {
    Vector E_inn;  // eps^2 * uxxx
    Vector E_b;    // dtV(x/eps) + d/dx of the flux mismatch
};

struct SolverConfig {
    double eps = 0.0;
    double nu = 0.0;
    double L = 0.0;
    Index N = 0;  // grid intervals; N + 1 points
    double dt = 0.0;
    double T = 0.0;
    std::string scheme = "imex-dispersion";  // or "nu-regularized"

    double w_bound = 0.5;           // admissibility envelope for |w|
    double threshold_factor = 1.0;  // abort when energy > factor * eps^2
    Index store_every = 0;          // 0: first/last snapshot only
    bool store_sources = false;     // keep sources and u_a with snapshots
    double layer_dy = 0.01;         // target fast-grid spacing

    double h() const { return L / static_cast<double>(N); }
};

/// Profile value at fast coordinate y >= 0: snaps to the nearest node when
/// within rounding distance, linear interpolation otherwise, and 0 beyond
/// the truncated far end (where the profile has decayed).
double sample_profile(const LayerProfile& profile, double y);

/// Error terms at the time of `hyp`, on its grid. Requires layer profiles of
/// kinds V and dtV on a fast grid reaching the decay horizon 40/sqrt(c).
SourcePair assemble_sources(const FluxModel& model, const HyperbolicField& hyp,
                            const LayerProfile& layerV,
                            const LayerProfile& layer_dtV, double eps);

/// Solves z - a^2 z'' = rhs on the uniform grid with z(0) = left_bc and
/// z(L) = 0 by a tridiagonal solve.
Vector helmholtz_solve_halfline(double a, const Vector& rhs, double left_bc,
                                double h);

/// One-step integrator for the remainder equation
///   dw/dt + d/dx[f(u_a + w) - f(u_a)] + eps^2 wxxx - nu wtxx + E = 0,
/// w(t,0) = w(t,L) = 0. Splitting per step: explicit SSP-RK3 on the flux
/// and sources (upwind-biased toward larger x since f' < 0), then an
/// implicit backward-Euler dispersion solve with a prefactored banded
/// matrix, then a Helmholtz correction of the increment when nu > 0.
class Stepper {
  public:
    Stepper(const SolverConfig& cfg, const FluxModel& model);

    Stepper(const Stepper&) = delete;
    Stepper& operator=(const Stepper&) = delete;

    RemainderState step(const RemainderState& state, const SourcePair& sources,
                        const Vector& u_a) const;

  private:
    SolverConfig cfg_;
    const FluxModel& model_;
    Eigen::SparseMatrix<double> disp_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
};

/// Convenience wrapper constructing a throwaway Stepper.
RemainderState step_remainder(const RemainderState& state,
                              const SourcePair& sources,
                              const SolverConfig& cfg, const FluxModel& model,
                              const Vector& u_a);

/// Full time history of a remainder integration: the weighted energy at
/// every step plus strided state snapshots (always including the first and
/// last). Sources and u_a are kept per snapshot when requested.
struct Trajectory {
    SolverConfig cfg;
    Vector tgrid;
    Vector weighted;  // trapz of w^2 + (eps^2/2)(Dx w)^2 at each step time
    std::vector<RemainderState> states;
    std::vector<Index> state_steps;
    std::vector<SourcePair> sources;
    std::vector<Vector> u_a;

    double sup_weighted() const { return weighted.maxCoeff(); }
};

/// Integrates from w(0,.) = 0 to T, recomputing the hyperbolic field, the
/// layer profiles, and the sources at every step (profiles frozen over the
/// step). Aborts with ThresholdCrossedError when the weighted energy
/// crosses threshold_factor * eps^2.
Trajectory solve_remainder(const SolverConfig& cfg, const FluxModel& model,
                           const SmoothFn& u_in, const SmoothFn& u_b);

/// u + V(./eps) + w pointwise on the shared grid.
Vector reconstruct_full(const HyperbolicField& hyp, const LayerProfile& layerV,
                        const RemainderState& state, double eps);

/// Sup over interior space-time points with x in [xmin, xmax] of
/// |D_t u + D_x f(u) + eps^2 D^3 u| for a sequence of full-field snapshots
/// on a uniform time grid. Needs at least 3 snapshots.
double residual_full(const FluxModel& model, const std::vector<Vector>& fields,
                     const Vector& tgrid, double h, double eps,
                     double xmin = 0.0,
                     double xmax = std::numeric_limits<double>::infinity());

}  // namespace kbl
