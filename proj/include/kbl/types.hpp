#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace kbl {

using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Open interval of admissible states.
struct Interval {
    double lo;
    double hi;

    bool contains(double u) const { return u > lo && u < hi; }
    bool contains_segment(double a, double b) const {
        return contains(a) && contains(b);
    }
    double width() const { return hi - lo; }
};

// Error taxonomy. Everything derives from std::runtime_error so callers
// that do not care can catch a single type.

struct AdmissibleRangeError : std::runtime_error {
    explicit AdmissibleRangeError(const std::string& what)
        : std::runtime_error(what) {}
};

struct ArgumentError : std::invalid_argument {
    explicit ArgumentError(const std::string& what)
        : std::invalid_argument(what) {}
};

struct ModelConsistencyError : std::runtime_error {
    explicit ModelConsistencyError(const std::string& what)
        : std::runtime_error(what) {}
};

struct DegenerateFitError : std::runtime_error {
    explicit DegenerateFitError(const std::string& what)
        : std::runtime_error(what) {}
};

struct LifespanError : std::runtime_error {
    explicit LifespanError(const std::string& what)
        : std::runtime_error(what) {}
};

struct NearBlowupError : std::runtime_error {
    explicit NearBlowupError(const std::string& what)
        : std::runtime_error(what) {}
};

struct CoverageError : std::runtime_error {
    explicit CoverageError(const std::string& what)
        : std::runtime_error(what) {}
};

struct StabilityError : std::runtime_error {
    explicit StabilityError(const std::string& what)
        : std::runtime_error(what) {}
};

struct DivergenceError : std::runtime_error {
    explicit DivergenceError(const std::string& what)
        : std::runtime_error(what) {}
};

struct ThresholdCrossedError : std::runtime_error {
    explicit ThresholdCrossedError(const std::string& what)
        : std::runtime_error(what) {}
};

}  // namespace kbl
