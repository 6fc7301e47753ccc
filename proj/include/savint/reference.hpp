#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "savint/problems.hpp"
#include "savint/types.hpp"

namespace savint {

// ---------------------------------------------------------------------------
// Generic first-order systems and reference trajectories
// ---------------------------------------------------------------------------

struct GeneralFirstOrderSystem {
    std::size_t dim = 0;
    std::function<Vec(double, const Vec&)> rhs;
};

struct ReferenceTrajectory {
    std::vector<double> times;
    std::vector<Vec> states;
    double atol = 0.0;
    double rtol = 0.0;
};

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4)
// ---------------------------------------------------------------------------

namespace dp54 {

// Butcher tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// difference between the 5th- and 4th-order weights
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

struct StageWork {
    Vec k1, k2, k3, k4, k5, k6, k7;
};

/// One Dormand-Prince step; k1 must hold rhs(t, y) on entry, and k7 leaves
/// with rhs(t+h, y5) for FSAL reuse.  Returns the 5th-order solution, with
/// the embedded error difference in `err`.
inline Vec step(const GeneralFirstOrderSystem& sys, double t, const Vec& y,
                double h, StageWork& w, Vec& err) {
    const auto eval = [&sys](double tt, const Vec& yy) {
        Vec f = sys.rhs(tt, yy);
        if (!all_finite(f))
            throw DomainError("adapt_integrate: rhs returned NaN/Inf at t = " +
                              std::to_string(tt));
        return f;
    };
    w.k2 = eval(t + c2 * h, y + (h * a21) * w.k1);
    w.k3 = eval(t + c3 * h, y + (h * a31) * w.k1 + (h * a32) * w.k2);
    w.k4 = eval(t + c4 * h, y + (h * a41) * w.k1 + (h * a42) * w.k2 + (h * a43) * w.k3);
    w.k5 = eval(t + c5 * h, y + (h * a51) * w.k1 + (h * a52) * w.k2 +
                                (h * a53) * w.k3 + (h * a54) * w.k4);
    w.k6 = eval(t + h, y + (h * a61) * w.k1 + (h * a62) * w.k2 + (h * a63) * w.k3 +
                           (h * a64) * w.k4 + (h * a65) * w.k5);
    Vec y5 = y + (h * b1) * w.k1 + (h * b3) * w.k3 + (h * b4) * w.k4 +
             (h * b5) * w.k5 + (h * b6) * w.k6;
    w.k7 = eval(t + h, y5);
    err = (h * e1) * w.k1 + (h * e3) * w.k3 + (h * e4) * w.k4 + (h * e5) * w.k5 +
          (h * e6) * w.k6 + (h * e7) * w.k7;
    return y5;
}

}  // namespace dp54

/// Single fixed-size 5th-order step, exposed for order measurements.
inline Vec dp54_fixed_step(const GeneralFirstOrderSystem& sys, double t,
                           const Vec& y, double h) {
    dp54::StageWork w;
    w.k1 = sys.rhs(t, y);
    Vec err;
    return dp54::step(sys, t, y, h, w, err);
}

/// Adaptive integration with a PI step-size controller.  Steps are clipped to
/// land exactly on every requested sample time; no dense output is used.
inline ReferenceTrajectory adapt_integrate(const GeneralFirstOrderSystem& sys,
                                           const Vec& y0,
                                           const std::vector<double>& sample_times,
                                           double atol, double rtol,
                                           double initial_step = 0.0) {
    if (!(atol > 0.0) || !(rtol > 0.0))
        throw DomainError("adapt_integrate: tolerances must be positive");
    if (sample_times.empty())
        throw DomainError("adapt_integrate: no sample times");
    for (std::size_t i = 0; i < sample_times.size(); ++i) {
        if (sample_times[i] < 0.0 ||
            (i > 0 && sample_times[i] <= sample_times[i - 1]))
            throw DomainError("adapt_integrate: sample times must be ascending and >= 0");
    }

    ReferenceTrajectory traj;
    traj.atol = atol;
    traj.rtol = rtol;

    double t = 0.0;
    Vec y = y0;
    // the trajectory always starts at t = 0; requested times follow
    traj.times.push_back(0.0);
    traj.states.push_back(y);
    std::size_t next_sample = sample_times[0] == 0.0 ? 1 : 0;
    if (next_sample == sample_times.size()) return traj;

    const auto scaled_norm = [&](const Vec& err, const Vec& ya, const Vec& yb) {
        double acc = 0.0;
        for (std::size_t i = 0; i < err.size(); ++i) {
            const double sc = atol + rtol * std::max(std::abs(ya[i]), std::abs(yb[i]));
            const double q = err[i] / sc;
            acc += q * q;
        }
        return std::sqrt(acc / double(err.size()));
    };

    dp54::StageWork w;
    w.k1 = sys.rhs(t, y);
    if (!all_finite(w.k1))
        throw DomainError("adapt_integrate: rhs returned NaN/Inf at t = 0");

    // initial step: small fraction of the first sample interval, limited by
    // the derivative scale
    double h = initial_step;
    if (h <= 0.0) {
        const double span = sample_times.back();
        double d0 = 0.0, d1 = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double sc = atol + rtol * std::abs(y[i]);
            d0 = std::max(d0, std::abs(y[i]) / sc);
            d1 = std::max(d1, std::abs(w.k1[i]) / sc);
        }
        h = (d1 > 1e-8) ? 0.01 * d0 / d1 : 1e-6 * span;
        h = std::min(h, 0.1 * span);
        h = std::max(h, 1e-10);
    }

    const double safety = 0.9, alpha = 0.7 / 5.0, beta = 0.4 / 5.0;
    double err_old = 1.0;
    bool rejected = false;

    while (next_sample < sample_times.size()) {
        if (h < 1e-14)
            throw StiffnessError("adapt_integrate: step size underflow at t = " +
                                     std::to_string(t),
                                 t);
        bool hit_sample = false;
        double h_try = h;
        if (t + h_try >= sample_times[next_sample] - 1e-14) {
            h_try = sample_times[next_sample] - t;
            hit_sample = true;
        }

        Vec err;
        const Vec y_new = dp54::step(sys, t, y, h_try, w, err);
        const double err_norm = scaled_norm(err, y, y_new);

        if (err_norm <= 1.0 || h_try <= 1e-14) {
            t = hit_sample ? sample_times[next_sample] : t + h_try;
            y = y_new;
            w.k1 = w.k7;  // FSAL
            if (hit_sample) {
                traj.times.push_back(t);
                traj.states.push_back(y);
                ++next_sample;
            }
            double factor = safety * std::pow(std::max(err_norm, 1e-16), -alpha) *
                            std::pow(err_old, beta);
            factor = std::clamp(factor, 0.2, 5.0);
            if (rejected) factor = std::min(factor, 1.0);
            h = std::max(h, h_try) * factor;  // grow from the unclipped size
            err_old = std::max(err_norm, 1e-16);
            rejected = false;
        } else {
            const double factor =
                std::clamp(safety * std::pow(err_norm, -alpha), 0.2, 1.0);
            h = h_try * factor;
            rejected = true;
        }
    }
    return traj;
}

// ---------------------------------------------------------------------------
// First-order views of the catalog problems
// ---------------------------------------------------------------------------

/// Flattens a problem to y' = f(t, y): (q, p) for oscillatory problems, u for
/// the general form, (x, v) for charged particles.  The auxiliary variable is
/// excluded: along the exact flow it is a function of the state.
inline GeneralFirstOrderSystem as_first_order(const ProblemInstance& inst) {
    GeneralFirstOrderSystem sys;
    if (const auto* o = std::get_if<OsdeSetup>(&inst.setup)) {
        const std::size_t d = o->q0.size();
        sys.dim = 2 * d;
        const OsdeProblem prob = o->problem;  // copied: keeps the view self-contained
        sys.rhs = [prob, d](double, const Vec& y) {
            Vec q(d);
            for (std::size_t i = 0; i < d; ++i) q[i] = y[i];
            Vec acc = prob.force(q);
            acc -= (1.0 / (prob.eps * prob.eps)) * (prob.a * q);
            Vec out(2 * d);
            for (std::size_t i = 0; i < d; ++i) {
                out[i] = y[d + i];
                out[d + i] = acc[i];
            }
            return out;
        };
    } else if (const auto* g = std::get_if<GeneralSetup>(&inst.setup)) {
        sys.dim = g->u0.size();
        const GeneralSavSystem s = g->system;
        sys.rhs = [s](double, const Vec& u) {
            Vec out = s.r_mat * u;
            out += s.j_mat * s.grad_potential(u);
            return out;
        };
    } else {
        const auto& c = std::get<CpdSetup>(inst.setup);
        const CpdProblem prob = c.problem;
        sys.dim = 6;
        sys.rhs = [prob](double, const Vec& y) {
            const Vec3 x{y[0], y[1], y[2]};
            const Vec3 v{y[3], y[4], y[5]};
            const Vec3 acc = cross(v, prob.b_field(x)) + prob.e_field(x);
            return Vec{v[0], v[1], v[2], acc[0], acc[1], acc[2]};
        };
    }
    return sys;
}

/// Initial condition of the flattened system.
inline Vec first_order_initial(const ProblemInstance& inst) {
    if (const auto* o = std::get_if<OsdeSetup>(&inst.setup)) {
        const std::size_t d = o->q0.size();
        Vec y(2 * d);
        for (std::size_t i = 0; i < d; ++i) {
            y[i] = o->q0[i];
            y[d + i] = o->p0[i];
        }
        return y;
    }
    if (const auto* g = std::get_if<GeneralSetup>(&inst.setup)) return g->u0;
    const auto& c = std::get<CpdSetup>(inst.setup);
    return Vec{c.x0[0], c.x0[1], c.x0[2], c.v0[0], c.v0[1], c.v0[2]};
}

}  // namespace savint
