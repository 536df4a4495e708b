#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>

#include "kbl/types.hpp"

namespace kbl {

/// Scalar flux nonlinearity with analytic derivatives up to third order,
/// restricted to an admissible interval J on which f' <= -c < 0.
///
/// Construction goes through make_flux() (the named registry) or the
/// explicit constructor, both of which verify the monotonicity bound on a
/// dense sample of J and cross-check the supplied derivatives against
/// central differences.
class FluxModel {
  public:
    using ScalarFn = std::function<double(double)>;

    FluxModel(ScalarFn f, ScalarFn fp, ScalarFn fpp, ScalarFn fppp,
              Interval J, ScalarFn antiderivative = nullptr,
              ScalarFn fourth = nullptr);

    /// order-th derivative of f at u, order in 0..3.
    double eval(double u, int order) const;

    /// Fourth derivative; exact for registry fluxes (zero unless supplied).
    /// Needed by the characteristics solver for third space derivatives.
    double eval4(double u) const;

    double c() const { return c_; }
    const Interval& admissible() const { return J_; }
    bool has_antiderivative() const { return static_cast<bool>(F0_); }
    double antiderivative(double u) const;

    void require_in_range(double u, const char* who) const;
    void require_segment(double a, double b, const char* who) const;

  private:
    ScalarFn d_[4];
    ScalarFn F0_;    // primitive of f, optional
    ScalarFn d4_;    // optional fourth derivative
    Interval J_;
    double c_ = 0.0;
};

/// F(u0, V) = integral_0^V [f(u0 + s) - f(u0)] ds. Always <= 0 on J.
double potential_F(const FluxModel& model, double u0, double V);

/// g(a, w) with f(a + w) = f(a) + f'(a) w + g(a, w) w^2 exactly;
/// continuous at w = 0 with value f''(a)/2.
double taylor_g(const FluxModel& model, double a, double w);

/// H(u, V, u0) = f(u + V) - f(u) - f(u0 + V) + f(u0).
double mismatch_H(const FluxModel& model, double u, double V, double u0);

/// Free-function spelling of FluxModel::eval, mirroring the operation map.
inline double eval_flux(const FluxModel& model, double u, int order) {
    return model.eval(u, order);
}

/// Named registry: "linear" (k), "quadratic" (k), "cubic-perturbed" (k, b),
/// each restricted to the interval J = [params["jlo"], params["jhi"]]
/// (defaults per flux). The registry is the only construction path exposed
/// to the CLI.
FluxModel make_flux(const std::string& name,
                    const std::map<std::string, double>& params = {});

}  // namespace kbl
