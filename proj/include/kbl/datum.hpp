#pragma once

#include <vector>

#include "kbl/types.hpp"

namespace kbl {

/// Closed-form function family for initial and boundary data:
/// constant + sum of coef * x^m * exp(-rate*x) * {1 | cos(freq x) | sin(freq x)}.
/// Closed under differentiation, so derivatives up to fourth order are exact.
class SmoothFn {
  public:
    enum class Trig { None, Cos, Sin };

    struct Term {
        double coef = 0.0;
        int pow = 0;       // m >= 0
        double rate = 0.0; // exponential decay rate
        Trig trig = Trig::None;
        double freq = 0.0;
    };

    SmoothFn() = default;
    SmoothFn(double constant, std::vector<Term> terms);

    /// order in 0..4; order 0 includes the constant.
    double eval(double x, int order = 0) const;

    double operator()(double x) const { return eval(x, 0); }

  private:
    double constant_ = 0.0;
    std::vector<Term> orders_[5];
};

}  // namespace kbl
