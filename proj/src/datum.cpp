#include "kbl/datum.hpp"

#include <cmath>

namespace kbl {

namespace {

std::vector<SmoothFn::Term> differentiate(
    const std::vector<SmoothFn::Term>& terms) {
    using Term = SmoothFn::Term;
    using Trig = SmoothFn::Trig;
    std::vector<Term> out;
    out.reserve(3 * terms.size());
    for (const Term& t : terms) {
        if (t.pow > 0)
            out.push_back({t.coef * t.pow, t.pow - 1, t.rate, t.trig, t.freq});
        if (t.rate != 0.0)
            out.push_back({-t.coef * t.rate, t.pow, t.rate, t.trig, t.freq});
        if (t.trig == Trig::Cos)
            out.push_back({-t.coef * t.freq, t.pow, t.rate, Trig::Sin, t.freq});
        else if (t.trig == Trig::Sin)
            out.push_back({t.coef * t.freq, t.pow, t.rate, Trig::Cos, t.freq});
    }
    return out;
}

}  // namespace

SmoothFn::SmoothFn(double constant, std::vector<Term> terms)
    : constant_(constant) {
    for (const Term& t : terms)
        if (t.pow < 0)
            throw ArgumentError("SmoothFn: negative powers not supported");
    orders_[0] = std::move(terms);
    for (int k = 1; k <= 4; ++k) orders_[k] = differentiate(orders_[k - 1]);
}

double SmoothFn::eval(double x, int order) const {
    if (order < 0 || order > 4)
        throw ArgumentError("SmoothFn: derivative order must be in 0..4");
    double sum = order == 0 ? constant_ : 0.0;
    for (const Term& t : orders_[order]) {
        double v = t.coef;
        // x^m without pow() for the small integer powers used here
        for (int i = 0; i < t.pow; ++i) v *= x;
        if (t.rate != 0.0) v *= std::exp(-t.rate * x);
        if (t.trig == Trig::Cos)
            v *= std::cos(t.freq * x);
        else if (t.trig == Trig::Sin)
            v *= std::sin(t.freq * x);
        sum += v;
    }
    return sum;
}

}  // namespace kbl
