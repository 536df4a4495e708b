#include "kbl/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "kbl/gridops.hpp"

namespace kbl {

namespace {

double grid_spacing(const Vector& xgrid, const char* who) {
    if (xgrid.size() < 2)
        throw ArgumentError(std::string(who) + ": grid too small");
    return xgrid(1) - xgrid(0);
}

}  // namespace

double weighted_energy(const RemainderState& state, double eps) {
    const double h = grid_spacing(state.xgrid, "weighted_energy");
    const Vector wx = diff1(state.w, h);
    Vector dens =
        state.w.array().square() + 0.5 * eps * eps * wx.array().square();
    return trapz(dens, h);
}

double linearized_energy(const FluxModel& model, const Vector& u_a,
                         const RemainderState& state, double eps) {
    if (u_a.size() != state.w.size())
        throw ArgumentError("linearized_energy: grid mismatch");
    const double h = grid_spacing(state.xgrid, "linearized_energy");
    const Vector wx = diff1(state.w, h);
    Vector dens(state.w.size());
    for (Index i = 0; i < dens.size(); ++i)
        dens(i) = 0.5 * eps * eps * wx(i) * wx(i) -
                  model.eval(u_a(i), 1) * state.w(i) * state.w(i);
    return trapz(dens, h);
}

std::array<double, 7> iterm_ledger(const Trajectory& traj,
                                   const FluxModel& model) {
    const size_t K = traj.states.size();
    if (K < 3 || traj.sources.size() != K || traj.u_a.size() != K)
        throw ArgumentError(
            "iterm_ledger: trajectory must store states, sources, and u_a "
            "at every step");
    for (size_t k = 0; k < K; ++k)
        if (traj.state_steps[k] != static_cast<Index>(k))
            throw ArgumentError("iterm_ledger: snapshot stride must be 1");

    const double h = grid_spacing(traj.states[0].xgrid, "iterm_ledger");
    const double dt = traj.tgrid(1) - traj.tgrid(0);
    const double eps2 = traj.cfg.eps * traj.cfg.eps;
    const Index n = traj.states[0].w.size();

    // Centered time differences at interior snapshots; time integral by
    // composite trapezoid over those nodes.
    std::array<double, 7> out{};
    for (size_t k = 1; k + 1 < K; ++k) {
        const Vector dtW =
            (traj.states[k + 1].W - traj.states[k - 1].W) / (2.0 * dt);
        const Vector dtw =
            (traj.states[k + 1].w - traj.states[k - 1].w) / (2.0 * dt);
        const Vector& w = traj.states[k].w;
        const Vector& ua = traj.u_a[k];

        Vector lin(n), quad(n);
        for (Index i = 0; i < n; ++i) {
            lin(i) = model.eval(ua(i), 1) * w(i);
            quad(i) = taylor_g(model, ua(i), w(i)) * w(i) * w(i);
        }
        const Vector dlin = diff1(lin, h);
        const Vector dquad = diff1(quad, h);
        const Vector d3w = diff3(w, h);

        std::array<Vector, 6> integrands = {
            Vector(dtW.cwiseProduct(dtw)),
            Vector(dtW.cwiseProduct(dlin)),
            Vector(dtW.cwiseProduct(dquad)),
            Vector(eps2 * dtW.cwiseProduct(d3w)),
            Vector(dtW.cwiseProduct(traj.sources[k].E_inn)),
            Vector(dtW.cwiseProduct(traj.sources[k].E_b))};

        const double tw = (k == 1 || k + 2 == K) ? 0.5 * dt : dt;
        for (int j = 0; j < 6; ++j)
            out[static_cast<size_t>(j)] += tw * trapz(integrands[j], h);
    }
    out[6] = out[0] + out[1] + out[2] + out[3] + out[4] + out[5];
    return out;
}

double hminus1_norm(const Vector& field, double h) {
    const Index n = field.size();
    if (n < 3) throw ArgumentError("hminus1_norm: need >= 3 points");
    const double r = 1.0 / (h * h);
    const Index m = n - 2;
    Vector lo = Vector::Constant(m, -r);
    Vector di = Vector::Constant(m, 1.0 + 2.0 * r);
    Vector up = Vector::Constant(m, -r);
    Vector psi = Vector::Zero(n);
    psi.segment(1, m) = solve_tridiagonal(lo, di, up, field.segment(1, m));
    const Vector dpsi = diff1(psi, h);
    Vector dens = dpsi.array().square() + psi.array().square();
    return std::sqrt(trapz(dens, h));
}

std::pair<double, double> check_interpolation(const Vector& z, double h) {
    if (z.size() < 17)
        throw ArgumentError("check_interpolation: grid too coarse (N < 16)");
    const Vector dz = diff1(z, h);
    const Vector d2z = diff2(z, h);
    const Vector d3z = diff3(z, h);
    const double lhs = std::sqrt(trapz(Vector(d2z.array().square()), h));
    const double l2dz = std::sqrt(trapz(Vector(dz.array().square()), h));
    const double rhs = 3.0 * (hminus1_norm(d3z, h) + l2dz);
    return {lhs, rhs};
}

ScalingFit scaling_study(std::vector<SweepMember> members) {
    std::sort(members.begin(), members.end(),
              [](const SweepMember& a, const SweepMember& b) {
                  return a.eps > b.eps;
              });
    if (!members.empty() && members.front().threshold_crossed)
        members.erase(members.begin());
    if (members.size() < 4)
        throw ArgumentError("scaling_study: need at least 4 usable eps values");

    std::string offenders;
    for (const SweepMember& m : members) {
        if (!m.converged)
            offenders += (offenders.empty() ? "" : ", ") +
                         std::to_string(m.eps);
        if (m.threshold_crossed)
            throw ArgumentError(
                "scaling_study: threshold-crossed member below the largest "
                "eps (eps = " +
                std::to_string(m.eps) + ")");
    }
    if (!offenders.empty())
        throw ArgumentError("scaling_study: unconverged members at eps = " +
                            offenders);
    for (size_t i = 0; i + 1 < members.size(); ++i)
        if (!(members[i].eps > members[i + 1].eps))
            throw ArgumentError("scaling_study: duplicate eps values");

    ScalingFit fit;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const SweepMember& m : members) {
        if (!(m.sup_energy > 0.0))
            throw DegenerateFitError(
                "scaling_study: nonpositive sup energy cannot be fit");
        const double x = std::log(m.eps);
        const double y = std::log(m.sup_energy);
        fit.eps_list.push_back(m.eps);
        fit.sup_energies.push_back(m.sup_energy);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(members.size());
    const double denom = n * sxx - sx * sx;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    return fit;
}

EnergyReport build_energy_report(const Trajectory& traj,
                                 const FluxModel& model) {
    EnergyReport rep;
    rep.eps = traj.cfg.eps;
    rep.tgrid = traj.tgrid;
    rep.weighted = traj.weighted;
    rep.sup_weighted = traj.weighted.maxCoeff();
    if (!traj.u_a.empty() && traj.u_a.size() == traj.states.size()) {
        rep.linearized.resize(static_cast<Index>(traj.states.size()));
        for (size_t k = 0; k < traj.states.size(); ++k)
            rep.linearized(static_cast<Index>(k)) = linearized_energy(
                model, traj.u_a[k], traj.states[k], traj.cfg.eps);
        if (traj.states.size() >= 3 &&
            traj.state_steps.back() ==
                static_cast<Index>(traj.states.size()) - 1) {
            const auto ledger = iterm_ledger(traj, model);
            for (int j = 0; j < 6; ++j)
                rep.iterms[static_cast<size_t>(j)] =
                    ledger[static_cast<size_t>(j)];
            rep.iterm_sum = ledger[6];
            rep.has_iterms = true;
        }
    }
    return rep;
}

}  // namespace kbl
