#pragma once

#include <array>
#include <stdexcept>
#include <string>

namespace savint {

/// Base class for every error thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Mismatched or invalid dimensions (non-square input, length mismatch, ...).
struct DimensionError : Error {
    using Error::Error;
};

/// Input matrix is not symmetric within tolerance.
struct SymmetryError : Error {
    using Error::Error;
};

/// Matrix expected to be positive semi-definite has a negative eigenvalue.
struct NotPsdError : Error {
    using Error::Error;
};

/// The scalar 1 + F'gamma in a rank-1 solve is not safely positive.
struct SingularDenominatorError : Error {
    using Error::Error;
};

/// V(q) + C0 (or U(x) + C0) is not positive, so the auxiliary variable
/// cannot be formed.
struct InvalidShiftError : Error {
    using Error::Error;
};

/// A trajectory reached the singular set of the potential.  Carries the time
/// and the midpoint at which the shifted potential stopped being positive.
struct SingularPotentialError : Error {
    SingularPotentialError(const std::string& msg, double time,
                           std::array<double, 3> midpoint)
        : Error(msg), t(time), xhat(midpoint) {}
    double t;
    std::array<double, 3> xhat;
};

/// Fixed-point iteration produced a non-finite iterate.
struct DivergenceError : Error {
    using Error::Error;
};

/// Adaptive step size underflowed; the problem is too stiff or singular.
struct StiffnessError : Error {
    StiffnessError(const std::string& msg, double time) : Error(msg), t(time) {}
    double t;
};

/// A user-supplied function returned NaN/Inf, or an argument left the
/// mathematical domain (e.g. elliptic modulus outside [0,1]).
struct DomainError : Error {
    using Error::Error;
};

/// Reference state has zero norm, so a relative error is undefined.
struct DegenerateReferenceError : Error {
    using Error::Error;
};

}  // namespace savint
