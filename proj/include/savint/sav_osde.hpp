#pragma once

#include <cmath>
#include <functional>
#include <utility>

#include "savint/linalg.hpp"

namespace savint {

using VecFn = std::function<Vec(const Vec&)>;
using ScalarFn = std::function<double(const Vec&)>;

// ---------------------------------------------------------------------------
// Oscillatory second-order systems  q'' + (1/eps^2) A q = F(q)
// ---------------------------------------------------------------------------

struct OsdeProblem {
    Mat a;             // symmetric positive semi-definite stiffness
    double eps = 1.0;  // in (0, 1]; small eps means fast oscillation
    VecFn force;       // F(q) = -grad V(q)
    ScalarFn potential;
    VecFn grad_potential;
    double C0 = 100.0;  // auxiliary-variable shift, C0 > c0
    double c0 = 0.0;    // stated lower bound, V >= -c0
};

struct OsdeState {
    Vec q;
    Vec p;
    double s = 0.0;  // scalar auxiliary variable
    double t = 0.0;
};

/// Matrix functions of h*Omega with Omega = sqrt(A)/eps, built once per
/// (problem, step size) and reused across steps.  The eigenbasis and the
/// per-mode scalar values are kept alongside the assembled matrices: the
/// stepper works in modal coordinates, where the discrete energy identity
/// reduces to scalar trigonometric identities and therefore survives in
/// floating point over long runs.
///
/// The lower-left block of phi(hR), which would be g2(h Omega)/h, is never
/// materialized: in the update it only ever multiplies the zero position
/// block of the nonlinearity.  g2mM = cos(h Omega) - I is kept for
/// completeness and inspection.
struct OscillatorKernel {
    double h = 0.0;
    Mat cosM;      // cos(h Omega)
    Mat sincM;     // sinc(h Omega)
    Mat g1M;       // (1 - cos(h Omega)) / (h Omega)^2
    Mat g2mM;      // cos(h Omega) - 1
    Mat omegaSin;  // Omega sin(h Omega) = h Omega^2 sinc(h Omega)

    Mat basis;                   // eigenvectors of A in columns
    std::vector<double> lam_v;   // eigenvalues of A, ascending, clamped at 0
    std::vector<double> cos_v;   // per-mode cos(z_i), z_i = h sqrt(lam_i)/eps
    std::vector<double> sinc_v;  // per-mode sinc(z_i)
    std::vector<double> g1_v;    // per-mode g1(z_i)
    std::vector<double> hsinc_v; // per-mode h sinc(z_i)
    std::vector<double> wsin_v;  // per-mode h (lam_i/eps^2) sinc(z_i)

    Vec to_modal(const Vec& x) const {
        const std::size_t n = basis.rows();
        Vec r(n);
        for (std::size_t k = 0; k < n; ++k) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += basis(i, k) * x[i];
            r[k] = s;
        }
        return r;
    }
    Vec from_modal(const Vec& x) const { return basis * x; }
};

inline OsdeState lift_state(Vec q0, Vec p0, const OsdeProblem& prob) {
    const double shifted = prob.potential(q0) + prob.C0;
    if (!(shifted > 0.0))
        throw InvalidShiftError("lift_state: V(q0) + C0 = " +
                                std::to_string(shifted) + " is not positive");
    return {std::move(q0), std::move(p0), std::sqrt(shifted), 0.0};
}

namespace detail {

/// Per-mode rotation pair (c, hs) used by the stepper, nudged by ulps so
/// that c^2 + (lam/eps^2) hs^2 = 1 holds as exactly as doubles allow.  The
/// same pair is applied every step, so any one-sided defect in this radial
/// identity accumulates linearly in the discrete energy.
inline void nudge_rotation_pair(long double big, double& c, double& hs) {
    long double best = 1e30L;
    double bc = c, bh = hs;
    double cands_c[5] = {c, std::nextafter(c, 2.0), std::nextafter(std::nextafter(c, 2.0), 2.0),
                         std::nextafter(c, -2.0),
                         std::nextafter(std::nextafter(c, -2.0), -2.0)};
    double cands_h[5] = {hs, std::nextafter(hs, 1e30), std::nextafter(std::nextafter(hs, 1e30), 1e30),
                         std::nextafter(hs, -1e30),
                         std::nextafter(std::nextafter(hs, -1e30), -1e30)};
    for (double cc : cands_c)
        for (double hh : cands_h) {
            const long double defect =
                (long double)cc * cc + big * (long double)hh * hh - 1.0L;
            if (std::abs(defect) < best) {
                best = std::abs(defect);
                bc = cc;
                bh = hh;
            }
        }
    c = bc;
    hs = bh;
}

}  // namespace detail

inline OscillatorKernel build_kernel(const OsdeProblem& prob, double h) {
    const SpectralDecomp d = sym_eig(prob.a);
    const std::vector<double> lams = detail::psd_eigenvalues(d);
    const std::size_t n = lams.size();
    const double eps2 = prob.eps * prob.eps;

    std::vector<double> fc(n), fs(n), f1(n), f2(n), fw(n), fhs(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double z = h * std::sqrt(lams[i]) / prob.eps;
        fc[i] = even_fn(EvenFn::cos, z);
        fs[i] = even_fn(EvenFn::sinc, z);
        f1[i] = even_fn(EvenFn::g1, z);
        f2[i] = even_fn(EvenFn::g2m, z);
        fw[i] = h * (lams[i] / eps2) * fs[i];
    }
    OscillatorKernel k;
    k.h = h;
    k.cosM = detail::assemble(d.basis, fc);
    k.sincM = detail::assemble(d.basis, fs);
    k.g1M = detail::assemble(d.basis, f1);
    k.g2mM = detail::assemble(d.basis, f2);
    k.omegaSin = detail::assemble(d.basis, fw);
    for (std::size_t i = 0; i < n; ++i) {
        fhs[i] = h * fs[i];
        if (lams[i] > 0.0) {
            const long double big = (long double)lams[i] / ((long double)eps2);
            detail::nudge_rotation_pair(big, fc[i], fhs[i]);
            fw[i] = (double)(big * (long double)fhs[i]);
        }
    }
    k.basis = d.basis;
    k.lam_v = lams;
    k.cos_v = std::move(fc);
    k.sinc_v = std::move(fs);
    k.g1_v = std::move(f1);
    k.hsinc_v = std::move(fhs);
    k.wsin_v = std::move(fw);
    return k;
}

enum class Predictor { linear, corrected };

namespace detail {

inline double shifted_potential(const ScalarFn& v, const Vec& q, double c0shift) {
    const double shifted = v(q) + c0shift;
    if (!(shifted > 0.0))
        throw InvalidShiftError("V + C0 = " + std::to_string(shifted) +
                                " is not positive");
    return shifted;
}

}  // namespace detail

/// State expressed in the eigenbasis of A.  Long trajectories stay in these
/// coordinates so the linear flow never leaves the basis, which keeps the
/// rounding-level energy drift at a random walk instead of a linear trend.
struct OsdeModalState {
    Vec qh;
    Vec ph;
    double s = 0.0;
    double t = 0.0;
};

inline OsdeModalState to_modal_state(const OsdeState& st, const OscillatorKernel& k) {
    return {k.to_modal(st.q), k.to_modal(st.p), st.s, st.t};
}

inline OsdeState to_physical_state(const OsdeModalState& st, const OscillatorKernel& k) {
    return {k.from_modal(st.qh), k.from_modal(st.ph), st.s, st.t};
}

namespace detail {

inline Vec linear_midpoint_modal(const Vec& q, const OscillatorKernel& k,
                                 const Vec& qh, const Vec& ph) {
    Vec lin(qh.size());
    for (std::size_t i = 0; i < qh.size(); ++i)
        lin[i] = k.cos_v[i] * qh[i] + k.hsinc_v[i] * ph[i];
    return 0.5 * (q + k.from_modal(lin));
}

}  // namespace detail

/// One E2-SAV step in modal coordinates with a caller-supplied midpoint.
/// Resolves the implicit s-coupling by substituting the s-update into the
/// position update, which leaves a rank-1 linear system; every
/// identity-critical operation is mode-by-mode.
inline OsdeModalState e2sav_step_modal_at(const OsdeModalState& st,
                                          const OsdeProblem& prob,
                                          const OscillatorKernel& k,
                                          const Vec& q_mid) {
    const double h = k.h;
    const std::size_t d = st.qh.size();
    const Vec f = prob.force(q_mid);
    const double shifted = detail::shifted_potential(prob.potential, q_mid, prob.C0);
    const double root = std::sqrt(shifted);
    const Vec fh = k.to_modal(f);

    Vec l(d), gamma(d);
    for (std::size_t i = 0; i < d; ++i) {
        const double g1f = k.g1_v[i] * fh[i];
        gamma[i] = (h * h / (4.0 * shifted)) * g1f;
        l[i] = k.cos_v[i] * st.qh[i] + k.hsinc_v[i] * st.ph[i] +
               (h * h * st.s / root) * g1f;
    }
    l += dot(fh, st.qh) * gamma;

    Vec qh1 = rank1_solve(gamma, fh, l);
    const double s1 = st.s - dot(qh1 - st.qh, fh) / (2.0 * root);
    const double s_half = 0.5 * (st.s + s1);

    Vec ph1(d);
    for (std::size_t i = 0; i < d; ++i)
        ph1[i] = k.cos_v[i] * st.ph[i] - k.wsin_v[i] * st.qh[i] +
                 (h * s_half / root) * k.sinc_v[i] * fh[i];

    return {std::move(qh1), std::move(ph1), s1, st.t + h};
}

inline OsdeModalState e2sav_step_modal(const OsdeModalState& st,
                                       const OsdeProblem& prob,
                                       const OscillatorKernel& k,
                                       Predictor mode = Predictor::linear) {
    const Vec q = k.from_modal(st.qh);
    Vec q_mid = detail::linear_midpoint_modal(q, k, st.qh, st.ph);
    if (mode == Predictor::corrected) {
        const Vec f0 = prob.force(q);
        const double shifted = detail::shifted_potential(prob.potential, q, prob.C0);
        q_mid += (0.5 * k.h * k.h * st.s / std::sqrt(shifted)) * (k.g1M * f0);
    }
    return e2sav_step_modal_at(st, prob, k, q_mid);
}

/// Approximation of q at the half step: mode `linear` takes the position
/// block of (I + exp(hR))/2 z; mode `corrected` adds the half-step
/// nonlinear contribution evaluated at the current state.
inline Vec predict_midpoint(const OsdeState& st, const OscillatorKernel& k,
                            Predictor mode, const OsdeProblem& prob) {
    Vec mid = detail::linear_midpoint_modal(st.q, k, k.to_modal(st.q),
                                            k.to_modal(st.p));
    if (mode == Predictor::corrected) {
        const Vec f0 = prob.force(st.q);
        const double shifted = detail::shifted_potential(prob.potential, st.q, prob.C0);
        mid += (0.5 * k.h * k.h * st.s / std::sqrt(shifted)) * (k.g1M * f0);
    }
    return mid;
}

/// One step with a caller-supplied midpoint approximation.  The discrete
/// modified energy is preserved for any choice of q_mid.
inline OsdeState e2sav_step_at(const OsdeState& st, const OsdeProblem& prob,
                               const OscillatorKernel& k, const Vec& q_mid) {
    return to_physical_state(
        e2sav_step_modal_at(to_modal_state(st, k), prob, k, q_mid), k);
}

inline OsdeState e2sav_step(const OsdeState& st, const OsdeProblem& prob,
                            const OscillatorKernel& k,
                            Predictor mode = Predictor::linear) {
    return to_physical_state(
        e2sav_step_modal(to_modal_state(st, k), prob, k, mode), k);
}

/// Conserved quantity of the augmented system:
/// 0.5 p'p + (1/2 eps^2) q'Aq + s^2 - C0.
inline double modified_energy(const OsdeState& st, const OsdeProblem& prob) {
    const double quad = dot(st.q, prob.a * st.q) / (2.0 * prob.eps * prob.eps);
    return 0.5 * dot(st.p, st.p) + quad + st.s * st.s - prob.C0;
}

/// Same quantity evaluated mode by mode, 0.5 sum(ph^2) + 0.5 sum(lam qh^2)/eps^2
/// + s^2 - C0.  The modal sum has only non-negative quadratic terms, so it is
/// free of the cancellation that q'Aq suffers once the null-space mean of q
/// has grown large on long runs.
inline double modified_energy(const OsdeModalState& st, const OsdeProblem& prob,
                              const OscillatorKernel& k) {
    double e = 0.0;
    const double eps2 = prob.eps * prob.eps;
    for (std::size_t i = 0; i < st.qh.size(); ++i)
        e += 0.5 * st.ph[i] * st.ph[i] + 0.5 * (k.lam_v[i] / eps2) * st.qh[i] * st.qh[i];
    return e + st.s * st.s - prob.C0;
}

/// Original Hamiltonian 0.5 p'p + (1/2 eps^2) q'Aq + V(q).
inline double original_energy(const Vec& q, const Vec& p, const OsdeProblem& prob) {
    const double quad = dot(q, prob.a * q) / (2.0 * prob.eps * prob.eps);
    return 0.5 * dot(p, p) + quad + prob.potential(q);
}

// ---------------------------------------------------------------------------
// General first-order systems u' = R u + J g(u, s) with constant R
// ---------------------------------------------------------------------------

struct GeneralSavSystem {
    Mat r_mat;  // constant linear part
    Mat j_mat;  // skew structure matrix, R = J M with M symmetric
    std::function<Vec(const Vec&, double)> g;  // SAV-scaled nonlinearity, linear in s
    ScalarFn potential;
    VecFn grad_potential;
    double C0 = 100.0;
};

struct GeneralSavState {
    Vec u;
    double s = 0.0;
    double t = 0.0;
};

struct GeneralSavKernel {
    double h = 0.0;
    Mat exp_r;      // exp(hR)
    Mat phi_r;      // phi(hR)
    Mat quad_form;  // M = J'R, the symmetric matrix of the quadratic energy
};

inline GeneralSavKernel build_general_kernel(const GeneralSavSystem& sys, double h) {
    const Mat& j = sys.j_mat;
    if (max_abs(j + transpose(j)) > 1e-12 * std::max(1.0, max_abs(j)))
        throw SymmetryError("build_general_kernel: J is not skew-symmetric");
    GeneralSavKernel k;
    k.h = h;
    k.exp_r = dense_exp(h * sys.r_mat);
    k.phi_r = dense_phi(h * sys.r_mat);
    k.quad_form = transpose(j) * sys.r_mat;
    return k;
}

inline GeneralSavState lift_general(Vec u0, const GeneralSavSystem& sys) {
    const double shifted = sys.potential(u0) + sys.C0;
    if (!(shifted > 0.0))
        throw InvalidShiftError("lift_general: V(u0) + C0 is not positive");
    return {std::move(u0), std::sqrt(shifted), 0.0};
}

inline Vec predict_midpoint_general(const GeneralSavState& st,
                                    const GeneralSavSystem& sys,
                                    const GeneralSavKernel& k, Predictor mode) {
    Vec mid = 0.5 * (st.u + k.exp_r * st.u);
    if (mode == Predictor::corrected)
        mid += (0.5 * k.h) * (k.phi_r * (sys.j_mat * sys.g(st.u, st.s)));
    return mid;
}

/// One step with a caller-supplied midpoint approximation.  The s-coupling is
/// resolved exactly: substituting the s-update into the u-update reduces the
/// implicit system to a rank-1 solve in u.
inline GeneralSavState e2sav_step_general_at(const GeneralSavState& st,
                                             const GeneralSavSystem& sys,
                                             const GeneralSavKernel& k,
                                             const Vec& u_mid) {
    const Vec d = sys.grad_potential(u_mid);
    const double shifted = detail::shifted_potential(sys.potential, u_mid, sys.C0);
    const double root = std::sqrt(shifted);

    const Vec ghat = sys.g(u_mid, 1.0);
    const Vec bvec = k.h * (k.phi_r * (sys.j_mat * ghat));
    const Vec cvec = (1.0 / (4.0 * root)) * d;

    Vec l = k.exp_r * st.u;
    const double shift = st.s - dot(cvec, st.u);
    l += shift * bvec;

    Vec u1 = rank1_solve(-1.0 * bvec, cvec, l);
    const double s1 = st.s + dot(u1 - st.u, d) / (2.0 * root);
    return {std::move(u1), s1, st.t + k.h};
}

inline GeneralSavState e2sav_step_general(const GeneralSavState& st,
                                          const GeneralSavSystem& sys,
                                          const GeneralSavKernel& k,
                                          Predictor mode = Predictor::corrected) {
    return e2sav_step_general_at(st, sys, k,
                                 predict_midpoint_general(st, sys, k, mode));
}

/// 0.5 u'Mu + s^2 - C0 with M = J'R.
inline double modified_energy_general(const GeneralSavState& st,
                                      const GeneralSavSystem& sys) {
    const Mat m = transpose(sys.j_mat) * sys.r_mat;
    return 0.5 * dot(st.u, m * st.u) + st.s * st.s - sys.C0;
}

inline double original_energy_general(const Vec& u, const GeneralSavSystem& sys) {
    const Mat m = transpose(sys.j_mat) * sys.r_mat;
    return 0.5 * dot(u, m * u) + sys.potential(u);
}

}  // namespace savint
