#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "savint/sav_cpd.hpp"
#include "savint/sav_osde.hpp"

namespace savint {

// ---------------------------------------------------------------------------
// Jacobi elliptic functions (descending Landen / AGM)
// ---------------------------------------------------------------------------

struct JacobiElliptic {
    double sn = 0.0;
    double cn = 1.0;
    double dn = 1.0;
};

/// sn, cn, dn of argument u and modulus k in [0, 1].  The phase is recovered
/// through the arithmetic-geometric mean with termination at 1e-15; dn is
/// reconstructed from sn, which is safe because dn >= k' >= 0 on the real
/// line.
inline JacobiElliptic jacobi_elliptic(double u, double modulus) {
    if (!(modulus >= 0.0 && modulus <= 1.0))
        throw DomainError("jacobi_elliptic: modulus " + std::to_string(modulus) +
                          " outside [0, 1]");
    if (modulus == 0.0) return {std::sin(u), std::cos(u), 1.0};
    if (modulus == 1.0) {
        const double sech = 1.0 / std::cosh(u);
        return {std::tanh(u), sech, sech};
    }

    std::vector<double> a{1.0}, c{modulus};
    double b = std::sqrt((1.0 - modulus) * (1.0 + modulus));
    int n = 0;
    while (std::abs(c.back()) > 1e-15 && n < 30) {
        const double an = 0.5 * (a.back() + b);
        const double cn1 = 0.5 * (a.back() - b);
        b = std::sqrt(a.back() * b);
        a.push_back(an);
        c.push_back(cn1);
        ++n;
    }

    double phi = std::ldexp(a[n] * u, n);
    for (int i = n; i >= 1; --i) {
        const double ratio = std::clamp(c[i] / a[i] * std::sin(phi), -1.0, 1.0);
        phi = 0.5 * (phi + std::asin(ratio));
    }

    JacobiElliptic out;
    out.sn = std::sin(phi);
    out.cn = std::cos(phi);
    out.dn = std::sqrt(std::max(0.0, 1.0 - modulus * modulus * out.sn * out.sn));
    return out;
}

inline double jacobi_sn(double u, double modulus) {
    return jacobi_elliptic(u, modulus).sn;
}

// ---------------------------------------------------------------------------
// Benchmark problem catalog
// ---------------------------------------------------------------------------

struct OsdeSetup {
    OsdeProblem problem;
    Vec q0;
    Vec p0;
};

struct GeneralSetup {
    GeneralSavSystem system;
    Vec u0;
};

struct CpdSetup {
    CpdProblem problem;
    Vec3 x0;
    Vec3 v0;
};

struct ProblemInstance {
    std::string tag;
    std::variant<OsdeSetup, GeneralSetup, CpdSetup> setup;
    /// exact (q, p) at time t; only the Duffing problem provides one
    std::function<std::array<double, 2>(double)> exact;
};

/// Henon-Heiles in the stiff first-order form u' = R u + J grad V(u), with
/// u = (q1, q2, p1, p2) and only the (q1, p1) plane rotating at rate 1/eps.
inline ProblemInstance henon_heiles(double eps) {
    if (!(eps > 0.0)) throw DomainError("henon_heiles: eps must be positive");
    GeneralSavSystem sys;
    sys.j_mat = Mat(4, 4);
    sys.j_mat(0, 2) = 1.0;
    sys.j_mat(1, 3) = 1.0;
    sys.j_mat(2, 0) = -1.0;
    sys.j_mat(3, 1) = -1.0;
    Mat m(4, 4);
    m(0, 0) = 1.0 / eps;
    m(2, 2) = 1.0 / eps;
    sys.r_mat = sys.j_mat * m;
    sys.potential = [](const Vec& u) {
        const double q1 = u[0], q2 = u[1], p2 = u[3];
        return 0.5 * (p2 * p2 + q2 * q2) + q1 * q1 * q2 - q2 * q2 * q2 / 3.0;
    };
    sys.grad_potential = [](const Vec& u) {
        const double q1 = u[0], q2 = u[1], p2 = u[3];
        return Vec{2.0 * q1 * q2, q2 + q1 * q1 - q2 * q2, 0.0, p2};
    };
    sys.C0 = 100.0;
    const ScalarFn pot = sys.potential;
    const VecFn grad = sys.grad_potential;
    const double c0v = sys.C0;
    sys.g = [pot, grad, c0v](const Vec& u, double s) {
        Vec gr = grad(u);
        gr *= s / std::sqrt(pot(u) + c0v);
        return gr;
    };
    ProblemInstance inst;
    inst.tag = "henon";
    inst.setup = GeneralSetup{std::move(sys), Vec{0.12, 0.12, 0.12, 0.12}};
    return inst;
}

/// Duffing oscillator q'' = -(omega^2 + k^2) q + 2 k^2 q^3 with the exact
/// solution q(t) = sn(omega t; k/omega).
inline ProblemInstance duffing(double omega, double k) {
    if (!(k > 0.0 && k < omega))
        throw DomainError("duffing: requires 0 < k < omega (modulus k/omega in (0,1))");
    OsdeProblem p;
    p.a = Mat(1, 1);
    p.a(0, 0) = omega * omega + k * k;
    p.eps = 1.0;
    p.force = [k](const Vec& q) { return Vec{2.0 * k * k * q[0] * q[0] * q[0]}; };
    p.potential = [k](const Vec& q) {
        const double q2 = q[0] * q[0];
        return -0.5 * k * k * q2 * q2;
    };
    p.grad_potential = [k](const Vec& q) {
        return Vec{-2.0 * k * k * q[0] * q[0] * q[0]};
    };
    p.C0 = 100.0;
    p.c0 = 0.5 * k * k;  // bound for |q| <= 1, where the exact solution lives

    ProblemInstance inst;
    inst.tag = "duffing";
    inst.setup = OsdeSetup{std::move(p), Vec{0.0}, Vec{omega}};
    const double kappa = k / omega;
    inst.exact = [omega, kappa](double t) {
        const JacobiElliptic e = jacobi_elliptic(omega * t, kappa);
        return std::array<double, 2>{e.sn, omega * e.cn * e.dn};
    };
    return inst;
}

/// Periodic sine-Gordon discretization on [-1, 1] with N grid points:
/// U'' + Q U = -sin(U), Q the (-1, 2, -1)/dx^2 circulant.
inline ProblemInstance sine_gordon(int n) {
    if (n < 4 || n % 2 != 0)
        throw DomainError("sine_gordon: N must be an even integer >= 4");
    if (n >= 100)
        throw DomainError("sine_gordon: V is bounded below by -N, so C0 = 100 "
                          "requires N < 100");
    OsdeProblem p;
    const double dx = 2.0 / n;
    const double w = 1.0 / (dx * dx);
    p.a = Mat(n, n);
    for (int i = 0; i < n; ++i) {
        p.a(i, i) = 2.0 * w;
        p.a(i, (i + 1) % n) = -w;
        p.a(i, (i + n - 1) % n) = -w;
    }
    p.eps = 1.0;
    p.force = [](const Vec& u) {
        Vec f(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) f[i] = -std::sin(u[i]);
        return f;
    };
    p.potential = [](const Vec& u) {
        double v = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) v -= std::cos(u[i]);
        return v;
    };
    p.grad_potential = [](const Vec& u) {
        Vec g(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) g[i] = std::sin(u[i]);
        return g;
    };
    p.C0 = 100.0;
    p.c0 = double(n);

    Vec u0(n), ut0(n);
    for (int i = 0; i < n; ++i) {
        u0[i] = std::numbers::pi;
        ut0[i] = std::sqrt(double(n)) *
                 (0.01 + std::sin(2.0 * std::numbers::pi * double(i + 1) / double(n)));
    }
    ProblemInstance inst;
    inst.tag = "sine-gordon";
    inst.setup = OsdeSetup{std::move(p), std::move(u0), std::move(ut0)};
    return inst;
}

namespace detail {

inline CpdProblem coulomb_plane_problem() {
    CpdProblem p;
    p.potential = [](const Vec3& x) {
        return 1.0 / (100.0 * std::sqrt(x[0] * x[0] + x[1] * x[1]));
    };
    p.e_field = [](const Vec3& x) {
        const double rho2 = x[0] * x[0] + x[1] * x[1];
        const double denom = 100.0 * rho2 * std::sqrt(rho2);
        return Vec3{x[0] / denom, x[1] / denom, 0.0};
    };
    p.C0 = 1.0;
    p.c0 = 0.0;  // U > 0 everywhere
    return p;
}

}  // namespace detail

/// Charged particle in the constant field B = (0, 0, 1/eps) above the planar
/// Coulomb potential U = 1/(100 sqrt(x1^2 + x2^2)).
inline ProblemInstance cpd_constant(double eps) {
    if (!(eps > 0.0)) throw DomainError("cpd_constant: eps must be positive");
    CpdProblem p = detail::coulomb_plane_problem();
    p.b_field = [eps](const Vec3&) { return Vec3{0.0, 0.0, 1.0 / eps}; };
    ProblemInstance inst;
    inst.tag = "cpd-constant";
    inst.setup = CpdSetup{std::move(p), Vec3{0.7, 1.0, 0.1}, Vec3{0.9, 0.5, 0.4}};
    return inst;
}

/// Same particle under B = (0, 0, sqrt(x1^2 + x2^2)/eps).
inline ProblemInstance cpd_general(double eps) {
    if (!(eps > 0.0)) throw DomainError("cpd_general: eps must be positive");
    CpdProblem p = detail::coulomb_plane_problem();
    p.b_field = [eps](const Vec3& x) {
        return Vec3{0.0, 0.0, std::sqrt(x[0] * x[0] + x[1] * x[1]) / eps};
    };
    ProblemInstance inst;
    inst.tag = "cpd-general";
    inst.setup = CpdSetup{std::move(p), Vec3{0.7, 1.0, 0.1}, Vec3{0.9, 0.5, 0.4}};
    return inst;
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

struct ProblemParams {
    double eps = 1.0;
    double omega = 5.0;
    double k = 0.07;
    int n = 16;
    std::optional<double> c0_override;
};

inline const std::vector<std::string>& problem_tags() {
    static const std::vector<std::string> tags{
        "henon", "duffing", "sine-gordon", "cpd-constant", "cpd-general"};
    return tags;
}

inline ProblemInstance make_problem(const std::string& tag,
                                    const ProblemParams& params = {}) {
    ProblemInstance inst;
    if (tag == "henon")
        inst = henon_heiles(params.eps);
    else if (tag == "duffing")
        inst = duffing(params.omega, params.k);
    else if (tag == "sine-gordon")
        inst = sine_gordon(params.n);
    else if (tag == "cpd-constant")
        inst = cpd_constant(params.eps);
    else if (tag == "cpd-general")
        inst = cpd_general(params.eps);
    else {
        std::string valid;
        for (const std::string& t : problem_tags()) valid += " " + t;
        throw DomainError("unknown problem tag '" + tag + "'; valid tags:" + valid);
    }
    if (params.c0_override) {
        if (auto* o = std::get_if<OsdeSetup>(&inst.setup))
            o->problem.C0 = *params.c0_override;
        else if (auto* g = std::get_if<GeneralSetup>(&inst.setup))
            g->system.C0 = *params.c0_override;
        else if (auto* c = std::get_if<CpdSetup>(&inst.setup))
            c->problem.C0 = *params.c0_override;
    }
    return inst;
}

}  // namespace savint
