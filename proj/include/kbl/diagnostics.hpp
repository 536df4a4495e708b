#pragma once

#include <array>
#include <utility>
#include <vector>

#include "kbl/dispersive.hpp"
#include "kbl/flux.hpp"
#include "kbl/types.hpp"

namespace kbl {

/// Per-run energy history plus the consistency ledger of the energy
/// identity (when the trajectory stored enough data to evaluate it).
struct EnergyReport {
    double eps = 0.0;
    Vector tgrid;
    Vector weighted;    // every step
    Vector linearized;  // per stored snapshot (needs stored u_a)
    double sup_weighted = 0.0;
    std::array<double, 6> iterms{};
    double iterm_sum = 0.0;
    bool has_iterms = false;
};

/// One member of an eps sweep, reduced to what the scaling fit needs.
struct SweepMember {
    double eps = 0.0;
    double sup_energy = 0.0;
    bool converged = false;          // self-convergence check passed
    bool threshold_crossed = false;  // run aborted at the eps^2 guard
};

/// Log-log least-squares fit of sup energies against eps.
struct ScalingFit {
    std::vector<double> eps_list;      // strictly decreasing
    std::vector<double> sup_energies;  // aligned with eps_list
    double slope = 0.0;
    double intercept = 0.0;  // log of the fitted constant
};

/// Trapezoid quadrature of w^2 + (eps^2/2)(D_x w)^2 over [0, L].
double weighted_energy(const RemainderState& state, double eps);

/// Trapezoid quadrature of (eps^2/2)(D_x w)^2 - f'(u_a) w^2; coercive
/// because -f' >= c on the admissible interval.
double linearized_energy(const FluxModel& model, const Vector& u_a,
                         const RemainderState& state, double eps);

/// Discrete space-time quadratures of D_t W times each of the six terms of
/// the remainder equation, in the pre-integration-by-parts form:
///   [D_t w, D_x(f'(u_a)w), D_x(g(u_a,w)w^2), eps^2 D^3 w, E_inn, E_b].
/// Their continuous counterparts sum to zero; the discrete sum is a
/// consistency residual. Requires a trajectory stored at every step with
/// sources and u_a (store_every = 1, store_sources = true).
std::array<double, 7> iterm_ledger(const Trajectory& traj,
                                   const FluxModel& model);

/// Riesz-representative H^-1 norm on [0, L]: solves -psi'' + psi = field
/// with psi(0) = psi(L) = 0 and returns the H^1 norm of psi.
double hminus1_norm(const Vector& field, double h);

/// (lhs, rhs) of the interpolation inequality
///   ||D^2 z|| <= 3 (||D^3 z||_{H^-1} + ||D z||),
/// for z vanishing at the wall and (numerically) at L.
std::pair<double, double> check_interpolation(const Vector& z, double h);

/// Fits log(sup energy) against log(eps). Members that failed
/// self-convergence abort the fit; a threshold-crossed member is dropped
/// only when it is the largest eps (the estimate is asymptotic).
ScalingFit scaling_study(std::vector<SweepMember> members);

/// Energy report assembled from a trajectory (ledger included when the
/// trajectory stored per-step sources).
EnergyReport build_energy_report(const Trajectory& traj,
                                 const FluxModel& model);

}  // namespace kbl
