#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "savint/linalg.hpp"

namespace savint {

using FieldFn = std::function<Vec3(const Vec3&)>;
using PotentialFn = std::function<double(const Vec3&)>;

// ---------------------------------------------------------------------------
// Charged-particle dynamics  x'' = x' x B(x) + E(x)
// ---------------------------------------------------------------------------

struct CpdProblem {
    FieldFn b_field;        // magnetic field B(x)
    FieldFn e_field;        // electric field, E = -grad U
    PotentialFn potential;  // scalar potential U(x)
    double C0 = 1.0;        // auxiliary-variable shift, C0 > c0
    double c0 = 0.0;        // stated lower bound, U >= -c0
};

struct CpdState {
    Vec3 x;
    Vec3 v;
    double r = 0.0;  // scalar auxiliary variable
    double t = 0.0;
};

inline CpdState lift_cpd(const Vec3& x0, const Vec3& v0, const CpdProblem& prob) {
    const double shifted = prob.potential(x0) + prob.C0;
    if (!(shifted > 0.0))
        throw InvalidShiftError("lift_cpd: U(x0) + C0 = " + std::to_string(shifted) +
                                " is not positive");
    return {x0, v0, std::sqrt(shifted), 0.0};
}

/// Exact flow of the magnetic subflow: x and r frozen, v rotated by
/// exp(t Bhat(x)).  Does not advance the time stamp; physical time is
/// accounted for by the composition.
inline CpdState phi_L(const CpdState& st, const CpdProblem& prob, double t) {
    CpdState out = st;
    out.v = rodrigues_exp(prob.b_field(st.x), t) * st.v;
    return out;
}

/// Coefficients of the explicit form of the SAV subflow, all evaluated at the
/// midpoint approximation xhat.
struct PhiNLCoefficients {
    Mat3 a_mat;     // A_n = I - (h^2/(8 a_n)) scaledE scaledE'
    Mat3 b_mat;     // B_n = I - (h^2/4) scaledE scaledE' A_n
    double a = 1.0;
    double b = 1.0;
    double c = 1.0;
    Vec3 scaled_e;  // E(xhat) / sqrt(U(xhat) + C0)
};

inline PhiNLCoefficients phi_nl_coefficients(const CpdProblem& prob,
                                             const Vec3& xhat, double h,
                                             double t_for_error) {
    const double shifted = prob.potential(xhat) + prob.C0;
    if (!(shifted > 0.0))
        throw SingularPotentialError(
            "phi_NL: U + C0 = " + std::to_string(shifted) +
                " is not positive at t = " + std::to_string(t_for_error),
            t_for_error, xhat.e);
    PhiNLCoefficients co;
    co.scaled_e = (1.0 / std::sqrt(shifted)) * prob.e_field(xhat);
    const double wn2 = dot(co.scaled_e, co.scaled_e);
    const double h2 = h * h;
    co.a = 1.0 + h2 * wn2 / 8.0;
    co.a_mat = Mat3::identity();
    co.a_mat -= (h2 / (8.0 * co.a)) * outer(co.scaled_e, co.scaled_e);
    const Vec3 aw = co.a_mat * co.scaled_e;
    co.b = 1.0 - (h2 / 4.0) * dot(co.scaled_e, aw);
    co.c = 0.5 * (co.b + 1.0);
    co.b_mat = Mat3::identity();
    co.b_mat -= (h2 / 4.0) * outer(co.scaled_e, aw);
    return co;
}

/// Linearly implicit SAV propagator for the electric subflow, applied through
/// its explicit coefficient form.  Preserves 0.5|v|^2 + r^2 exactly.
inline CpdState phi_NL(const CpdState& st, const CpdProblem& prob, double h) {
    const Vec3 xhat = st.x + (0.5 * h) * st.v;
    const PhiNLCoefficients co = phi_nl_coefficients(prob, xhat, h, st.t);
    const Vec3& w = co.scaled_e;

    CpdState out;
    out.x = st.x + co.a_mat * (h * st.v + (0.5 * h * h * st.r) * w);
    out.v = co.b_mat * st.v + (co.c * h * st.r) * w;
    out.r = co.b * st.r - (0.5 * h) * dot(w, co.a_mat * st.v);
    out.t = st.t + h;
    return out;
}

// ---------------------------------------------------------------------------
// Split compositions S1, S2, S4, S6
// ---------------------------------------------------------------------------

enum class Subflow { L, NL };

struct SplitStage {
    Subflow tag;
    double fraction;  // substep as a fraction of h; may be negative
};

struct SplitScheme {
    std::vector<SplitStage> stages;  // applied in order
    int order = 1;
};

/// Outer fractions (f, g, f) of the Triple Jump composition that raises a
/// symmetric scheme from order p to p+2: f = 1/(2 - 2^{1/(p+1)}).
inline std::array<double, 3> triple_jump_fractions(int p) {
    const double root = std::pow(2.0, 1.0 / double(p + 1));
    const double f = 1.0 / (2.0 - root);
    return {f, -root * f, f};
}

inline SplitScheme make_split_scheme(int order) {
    auto scaled = [](const std::vector<SplitStage>& stages, double f) {
        std::vector<SplitStage> out;
        out.reserve(stages.size());
        for (const SplitStage& s : stages) out.push_back({s.tag, s.fraction * f});
        return out;
    };
    auto jump = [&scaled](const std::vector<SplitStage>& inner, int p) {
        const std::array<double, 3> f = triple_jump_fractions(p);
        // composition notation is right-to-left; execution starts with f[2]
        std::vector<SplitStage> out;
        for (int i = 2; i >= 0; --i) {
            const auto part = scaled(inner, f[i]);
            out.insert(out.end(), part.begin(), part.end());
        }
        return out;
    };

    const std::vector<SplitStage> s1{{Subflow::L, 1.0}, {Subflow::NL, 1.0}};
    const std::vector<SplitStage> s2{
        {Subflow::L, 0.5}, {Subflow::NL, 1.0}, {Subflow::L, 0.5}};

    switch (order) {
        case 1: return {s1, 1};
        case 2: return {s2, 2};
        case 4: return {jump(s2, 2), 4};
        case 6: return {jump(jump(s2, 2), 4), 6};
        default:
            throw DomainError("make_split_scheme: order must be 1, 2, 4 or 6");
    }
}

/// Applies the stages of the scheme in order; t advances by exactly h.
inline CpdState compose_step(const CpdState& st, const CpdProblem& prob,
                             const SplitScheme& scheme, double h) {
    CpdState cur = st;
    for (std::size_t i = 0; i < scheme.stages.size(); ++i) {
        const SplitStage& stage = scheme.stages[i];
        try {
            cur = stage.tag == Subflow::L ? phi_L(cur, prob, stage.fraction * h)
                                          : phi_NL(cur, prob, stage.fraction * h);
        } catch (const SingularPotentialError& e) {
            throw SingularPotentialError(
                "stage " + std::to_string(i) + " of S" +
                    std::to_string(scheme.order) + "-SAV: " + e.what(),
                e.t, e.xhat);
        }
    }
    cur.t = st.t + h;
    return cur;
}

/// Conserved quantity of the split SAV schemes: 0.5 |v|^2 + r^2 - C0.
inline double modified_energy_cpd(const CpdState& st, const CpdProblem& prob) {
    return 0.5 * dot(st.v, st.v) + st.r * st.r - prob.C0;
}

/// Original energy 0.5 |v|^2 + U(x).
inline double original_energy_cpd(const Vec3& x, const Vec3& v,
                                  const CpdProblem& prob) {
    return 0.5 * dot(v, v) + prob.potential(x);
}

}  // namespace savint
