#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "savint/sav_cpd.hpp"
#include "savint/types.hpp"

namespace savint {

// ---------------------------------------------------------------------------
// Fixed-point iteration
// ---------------------------------------------------------------------------

struct FixedPointConfig {
    double tol = 1e-10;
    int max_iter = 1000;
};

struct FixedPointResult {
    Vec value;
    int iterations = 0;
    bool converged = false;
};

/// Iterates x <- map(x) until the update is below tol or the iteration budget
/// is spent.  Non-convergence is reported through the flag, not an error; a
/// non-finite iterate is.
inline FixedPointResult fixed_point_solve(const std::function<Vec(const Vec&)>& map,
                                          Vec guess, const FixedPointConfig& cfg) {
    Vec x = std::move(guess);
    for (int k = 1; k <= cfg.max_iter; ++k) {
        Vec xn = map(x);
        if (!all_finite(xn))
            throw DivergenceError("fixed_point_solve: non-finite iterate at k = " +
                                  std::to_string(k));
        const double delta = norm(xn - x);
        x = std::move(xn);
        if (delta <= cfg.tol) return {std::move(x), k, true};
    }
    return {std::move(x), cfg.max_iter, false};
}

// ---------------------------------------------------------------------------
// Gauss-Legendre quadrature on [0, 1]
// ---------------------------------------------------------------------------

struct QuadratureRule {
    std::vector<double> nodes;    // in [0, 1]
    std::vector<double> weights;  // positive, sum to 1
};

/// n-point Gauss-Legendre rule mapped to [0, 1]; exact through degree 2n-1.
inline QuadratureRule gauss_legendre(int n) {
    if (n < 1 || n > 10)
        throw DomainError("gauss_legendre: n must be in [1, 10], got " +
                          std::to_string(n));
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        // Newton iteration on P_n from the Chebyshev-like initial guess
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[n - 1 - i] = 0.5 * (1.0 + x);
        rule.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

// ---------------------------------------------------------------------------
// AVF and implicit trapezoidal steps
// ---------------------------------------------------------------------------

using RhsFn = std::function<Vec(const Vec&)>;

struct ImplicitStepResult {
    Vec y;
    int iterations = 0;
    bool converged = false;
};

/// Average-vector-field step
///   y1 = y + h * sum_j w_j f((1-xi_j) y + xi_j y1),
/// solved by fixed-point iteration from the explicit Euler predictor.
inline ImplicitStepResult avf_step(const RhsFn& rhs, const Vec& y, double h,
                                   const QuadratureRule& quad,
                                   const FixedPointConfig& cfg) {
    auto map = [&](const Vec& y1) {
        Vec acc(y.size());
        for (std::size_t j = 0; j < quad.nodes.size(); ++j) {
            const double xi = quad.nodes[j];
            Vec mid = (1.0 - xi) * y;
            mid += xi * y1;
            acc += quad.weights[j] * rhs(mid);
        }
        Vec out = y;
        out += h * acc;
        return out;
    };
    Vec guess = y + h * rhs(y);
    FixedPointResult r = fixed_point_solve(map, std::move(guess), cfg);
    return {std::move(r.value), r.iterations, r.converged};
}

/// Implicit trapezoidal step y1 = y + (h/2)(f(y) + f(y1)).
inline ImplicitStepResult ito2_step(const RhsFn& rhs, const Vec& y, double h,
                                    const FixedPointConfig& cfg) {
    const Vec f0 = rhs(y);
    auto map = [&](const Vec& y1) {
        Vec out = y;
        out += (0.5 * h) * (f0 + rhs(y1));
        return out;
    };
    Vec guess = y + h * f0;
    FixedPointResult r = fixed_point_solve(map, std::move(guess), cfg);
    return {std::move(r.value), r.iterations, r.converged};
}

// ---------------------------------------------------------------------------
// Boris pusher (velocity-synchronized single step)
// ---------------------------------------------------------------------------

struct BorisState {
    Vec3 x;
    Vec3 v;
    double t = 0.0;
};

/// Half electric kick, magnetic rotation through the t/s vectors, half kick,
/// then drift.  Cross products follow the same v x B convention as phi_L.
inline BorisState boris_step(const BorisState& st, const CpdProblem& prob,
                             double h) {
    const Vec3 e = prob.e_field(st.x);
    const Vec3 tvec = (0.5 * h) * prob.b_field(st.x);
    const Vec3 svec = (2.0 / (1.0 + dot(tvec, tvec))) * tvec;

    const Vec3 vminus = st.v + (0.5 * h) * e;
    const Vec3 vprime = vminus + cross(vminus, tvec);
    const Vec3 vplus = vminus + cross(vprime, svec);
    const Vec3 v1 = vplus + (0.5 * h) * e;
    return {st.x + h * v1, v1, st.t + h};
}

}  // namespace savint
