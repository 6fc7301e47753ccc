#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "savint/problems.hpp"

using namespace savint;

namespace {

/// Central finite-difference gradient check, step 1e-6, relative error 1e-6.
void check_gradient(const ScalarFn& v, const VecFn& grad, const Vec& x) {
    const Vec g = grad(x);
    const double step = 1e-6;
    for (std::size_t i = 0; i < x.size(); ++i) {
        Vec hi = x, lo = x;
        hi[i] += step;
        lo[i] -= step;
        const double fd = (v(hi) - v(lo)) / (2.0 * step);
        CHECK(std::abs(fd - g[i]) <= 1e-6 * std::max(1.0, std::abs(g[i])));
    }
}

void check_gradient3(const PotentialFn& u, const FieldFn& e, const Vec3& x) {
    const Vec3 ev = e(x);
    const double step = 1e-6;
    for (int i = 0; i < 3; ++i) {
        Vec3 hi = x, lo = x;
        hi[i] += step;
        lo[i] -= step;
        // E = -grad U
        const double fd = -(u(hi) - u(lo)) / (2.0 * step);
        CHECK(std::abs(fd - ev[i]) <= 1e-6 * std::max(1.0, std::abs(ev[i])));
    }
}

}  // namespace

TEST_CASE("jacobi elliptic limits") {
    CHECK(jacobi_sn(0.0, 0.3) == 0.0);
    for (double u : {0.2, 1.1, -0.8, 3.0}) {
        CHECK(jacobi_sn(u, 0.0) == Catch::Approx(std::sin(u)).margin(1e-15));
        CHECK(jacobi_sn(u, 1.0) == Catch::Approx(std::tanh(u)).margin(1e-15));
    }
    CHECK_THROWS_AS(jacobi_sn(1.0, -0.1), DomainError);
    CHECK_THROWS_AS(jacobi_sn(1.0, 1.5), DomainError);
}

TEST_CASE("jacobi elliptic identities and bounds") {
    auto g = oracles::rng(501);
    for (int trial = 0; trial < 50; ++trial) {
        const double u = oracles::uniform(g, -5.0, 5.0);
        const double m = oracles::uniform(g, 0.0, 0.999);
        const JacobiElliptic e = jacobi_elliptic(u, m);
        CHECK(std::abs(e.sn) <= 1.0 + 1e-15);
        CHECK(e.sn * e.sn + e.cn * e.cn == Catch::Approx(1.0).margin(1e-13));
        CHECK(e.dn * e.dn + m * m * e.sn * e.sn == Catch::Approx(1.0).margin(1e-13));
    }
}

TEST_CASE("jacobi sn matches a reference integration") {
    // sn(.; m) solves q'' = -(1+m^2) q + 2 m^2 q^3, q(0)=0, q'(0)=1
    const double m = 0.5;
    auto rhs = [m](double, const Vec& y) {
        return Vec{y[1], -(1.0 + m * m) * y[0] + 2.0 * m * m * y[0] * y[0] * y[0]};
    };
    const Vec ref = oracles::rk4_integrate(rhs, Vec{0.0, 1.0}, 0.0, 1.0, 40000);
    CHECK(jacobi_sn(1.0, m) == Catch::Approx(ref[0]).margin(1e-12));
}

TEST_CASE("henon_heiles structure") {
    const ProblemInstance inst = henon_heiles(0.7);
    const auto& g = std::get<GeneralSetup>(inst.setup);

    const double v0 = g.system.potential(g.u0);
    const double expect = 0.0072 + 0.12 * 0.12 * 0.12 - std::pow(0.12, 3) / 3.0 + 0.0072;
    CHECK(v0 == Catch::Approx(expect).margin(1e-15));

    // R acts only on the (q1, p1) plane
    const Mat& r = g.system.r_mat;
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(r(i, 1) == 0.0);
        CHECK(r(i, 3) == 0.0);
    }
    const Mat e = dense_exp(0.3 * r);
    Vec q2_dir{0.0, 1.0, 0.0, 0.0}, p2_dir{0.0, 0.0, 0.0, 1.0};
    CHECK(norm(e * q2_dir - q2_dir) < 1e-14);
    CHECK(norm(e * p2_dir - p2_dir) < 1e-14);

    CHECK(g.system.C0 == 100.0);
    CHECK_THROWS_AS(henon_heiles(0.0), DomainError);
}

TEST_CASE("duffing parameters and exact solution") {
    for (double omega : {5.0, 10.0, 20.0}) {
        const ProblemInstance inst = duffing(omega, 0.07);
        const auto& o = std::get<OsdeSetup>(inst.setup);
        CHECK(o.problem.a(0, 0) == omega * omega + 0.07 * 0.07);
        CHECK(o.q0[0] == 0.0);
        CHECK(o.p0[0] == omega);
        CHECK(o.problem.C0 == 100.0);

        // H(q0, p0) = omega^2 / 2
        const double h0 = 0.5 * o.p0[0] * o.p0[0];
        CHECK(h0 == Catch::Approx(omega * omega / 2.0));

        REQUIRE(inst.exact);
        const auto at0 = inst.exact(0.0);
        CHECK(at0[0] == 0.0);
        CHECK(at0[1] == Catch::Approx(omega).margin(1e-14));
    }
    CHECK_THROWS_AS(duffing(5.0, 5.0), DomainError);
    CHECK_THROWS_AS(duffing(5.0, 6.0), DomainError);
}

TEST_CASE("duffing exact solution satisfies the equation of motion") {
    const double omega = 5.0, k = 0.07;
    const ProblemInstance inst = duffing(omega, k);
    // five-point second derivative; h = 1e-3 balances truncation against
    // rounding for omega = 5
    const double h = 1e-3;
    auto g = oracles::rng(509);
    for (int trial = 0; trial < 100; ++trial) {
        const double t = oracles::uniform(g, 0.1, 10.0);
        const double qm2 = inst.exact(t - 2 * h)[0];
        const double qm1 = inst.exact(t - h)[0];
        const double q0 = inst.exact(t)[0];
        const double qp1 = inst.exact(t + h)[0];
        const double qp2 = inst.exact(t + 2 * h)[0];
        const double qdd =
            (-qp2 + 16.0 * qp1 - 30.0 * q0 + 16.0 * qm1 - qm2) / (12.0 * h * h);
        const double residual =
            qdd + (omega * omega + k * k) * q0 - 2.0 * k * k * q0 * q0 * q0;
        CHECK(std::abs(residual) <= 1e-8 * std::max(1.0, omega * omega));
    }
}

TEST_CASE("duffing exact derivative matches a finite difference") {
    const ProblemInstance inst = duffing(10.0, 0.07);
    const double h = 1e-6;
    for (double t : {0.3, 1.7, 4.2}) {
        const double fd = (inst.exact(t + h)[0] - inst.exact(t - h)[0]) / (2.0 * h);
        CHECK(inst.exact(t)[1] == Catch::Approx(fd).margin(1e-6));
    }
}

TEST_CASE("sine_gordon discretization") {
    for (int n : {16, 32, 64}) {
        const ProblemInstance inst = sine_gordon(n);
        const auto& o = std::get<OsdeSetup>(inst.setup);
        const Mat& q = o.problem.a;

        // periodic stencil annihilates constants
        Vec ones(n);
        for (int i = 0; i < n; ++i) ones[i] = 1.0;
        CHECK(norm(q * ones) < 1e-12 * frobenius_norm(q));
        for (int i = 0; i < n; ++i) {
            double row = 0.0;
            for (int j = 0; j < n; ++j) row += q(i, j);
            CHECK(std::abs(row) < 1e-12 * (4.0 / (2.0 / n) / (2.0 / n)));
        }

        // largest eigenvalue is N^2 per the circulant formula
        const SpectralDecomp d = sym_eig(q);
        CHECK(d.eigenvalues.back() ==
              Catch::Approx(double(n) * double(n)).epsilon(1e-9));

        CHECK(o.q0[0] == std::numbers::pi);
        CHECK(o.p0[0] == Catch::Approx(std::sqrt(double(n)) *
                                       (0.01 + std::sin(2.0 * std::numbers::pi / n))));
    }
    CHECK_THROWS_AS(sine_gordon(3), DomainError);
    CHECK_THROWS_AS(sine_gordon(2), DomainError);
    CHECK_THROWS_AS(sine_gordon(128), DomainError);  // C0 = 100 <= c0 = N
}

TEST_CASE("cpd_constant fields") {
    const ProblemInstance inst = cpd_constant(0.25);
    const auto& c = std::get<CpdSetup>(inst.setup);

    CHECK(c.problem.potential(c.x0) ==
          Catch::Approx(1.0 / (100.0 * std::sqrt(1.49))).margin(1e-15));
    CHECK(norm(c.problem.b_field(c.x0) - Vec3{0.0, 0.0, 4.0}) == 0.0);
    CHECK(c.problem.C0 == 1.0);
    CHECK(c.problem.c0 == 0.0);

    // radial field: orthogonal to the azimuthal direction
    auto g = oracles::rng(521);
    for (int trial = 0; trial < 10; ++trial) {
        const Vec3 x = oracles::random_vec3(g, 0.2, 2.0);
        const Vec3 e = c.problem.e_field(x);
        const Vec3 azimuthal{-x[1], x[0], 0.0};
        CHECK(std::abs(dot(e, azimuthal)) < 1e-15);
    }
}

TEST_CASE("cpd_general field and vector potential") {
    const double eps = 0.5;
    const ProblemInstance inst = cpd_general(eps);
    const auto& c = std::get<CpdSetup>(inst.setup);

    CHECK(norm(c.problem.b_field(c.x0) -
               Vec3{0.0, 0.0, std::sqrt(1.49) / eps}) < 1e-15);
    CHECK(norm(c.problem.b_field(Vec3{1e-8, 1e-8, 0.3})) < 1e-7);

    // B equals the curl of (1/3eps)(-x2 rho, x1 rho, 0), checked by central
    // differences at random points
    auto vecpot = [eps](const Vec3& x) {
        const double rho = std::sqrt(x[0] * x[0] + x[1] * x[1]);
        return Vec3{-x[1] * rho / (3.0 * eps), x[0] * rho / (3.0 * eps), 0.0};
    };
    auto g = oracles::rng(523);
    const double step = 1e-6;
    for (int trial = 0; trial < 20; ++trial) {
        const Vec3 x = oracles::random_vec3(g, 0.3, 2.0);
        auto d = [&](int comp, int dir) {
            Vec3 hi = x, lo = x;
            hi[dir] += step;
            lo[dir] -= step;
            return (vecpot(hi)[comp] - vecpot(lo)[comp]) / (2.0 * step);
        };
        const Vec3 curl{d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1)};
        const Vec3 b = c.problem.b_field(x);
        for (int i = 0; i < 3; ++i)
            CHECK(std::abs(curl[i] - b[i]) <= 1e-6 * std::max(1.0, std::abs(b[i])));
    }
}

TEST_CASE("all declared gradient pairs are consistent") {
    auto g = oracles::rng(541);

    const ProblemInstance duff_inst = duffing(5.0, 0.07);
    const ProblemInstance sg_inst = sine_gordon(16);
    const ProblemInstance hh_inst = henon_heiles(1.0);
    const auto& duff = std::get<OsdeSetup>(duff_inst.setup);
    const auto& sg = std::get<OsdeSetup>(sg_inst.setup);
    const auto& hh = std::get<GeneralSetup>(hh_inst.setup);
    for (int trial = 0; trial < 100; ++trial) {
        check_gradient(duff.problem.potential, duff.problem.grad_potential,
                       oracles::random_vec(g, 1));
        // F = -grad V
        const Vec qd = oracles::random_vec(g, 1);
        CHECK(norm(duff.problem.force(qd) + duff.problem.grad_potential(qd)) < 1e-14);

        if (trial < 20) {
            check_gradient(sg.problem.potential, sg.problem.grad_potential,
                           oracles::random_vec(g, 16, -3.0, 3.0));
            check_gradient(hh.system.potential, hh.system.grad_potential,
                           oracles::random_vec(g, 4));
        }
    }

    const ProblemInstance cc_inst = cpd_constant(1.0);
    const ProblemInstance cg_inst = cpd_general(1.0);
    const auto& cc = std::get<CpdSetup>(cc_inst.setup);
    const auto& cg = std::get<CpdSetup>(cg_inst.setup);
    for (int trial = 0; trial < 100; ++trial) {
        const Vec3 x = oracles::random_vec3(g, 0.3, 2.0);  // away from the axis
        check_gradient3(cc.problem.potential, cc.problem.e_field, x);
        check_gradient3(cg.problem.potential, cg.problem.e_field, x);
    }
}

TEST_CASE("per-step energy identity across the oscillatory catalog") {
    auto g = oracles::rng(547);
    for (double h : {1e-3, 1e-2, 1e-1}) {
        for (double omega : {5.0, 20.0}) {
            const ProblemInstance inst = duffing(omega, 0.07);
            const auto& o = std::get<OsdeSetup>(inst.setup);
            const OscillatorKernel k = build_kernel(o.problem, h);
            for (Predictor mode : {Predictor::linear, Predictor::corrected}) {
                OsdeState st{oracles::random_vec(g, 1), oracles::random_vec(g, 1, -5.0, 5.0),
                             oracles::uniform(g, 8.0, 12.0), 0.0};
                const double before = modified_energy(st, o.problem);
                const double after =
                    modified_energy(e2sav_step(st, o.problem, k, mode), o.problem);
                CHECK(std::abs(after - before) <= 1e-12 * std::max(1.0, std::abs(before)));
            }
        }
        {
            const ProblemInstance inst = sine_gordon(16);
            const auto& o = std::get<OsdeSetup>(inst.setup);
            const OscillatorKernel k = build_kernel(o.problem, h);
            for (Predictor mode : {Predictor::linear, Predictor::corrected}) {
                OsdeState st{oracles::random_vec(g, 16, 2.0, 4.0),
                             oracles::random_vec(g, 16), oracles::uniform(g, 9.0, 11.0),
                             0.0};
                const double before = modified_energy(st, o.problem);
                const double after =
                    modified_energy(e2sav_step(st, o.problem, k, mode), o.problem);
                CHECK(std::abs(after - before) <= 1e-12 * std::max(1.0, std::abs(before)));
            }
        }
        for (double eps : {1.0, 0.01}) {
            const ProblemInstance inst = henon_heiles(eps);
            const auto& ge = std::get<GeneralSetup>(inst.setup);
            const GeneralSavKernel k = build_general_kernel(ge.system, h);
            for (Predictor mode : {Predictor::linear, Predictor::corrected}) {
                GeneralSavState st{oracles::random_vec(g, 4, -0.3, 0.3),
                                   oracles::uniform(g, 9.0, 11.0), 0.0};
                const double before = modified_energy_general(st, ge.system);
                const double after = modified_energy_general(
                    e2sav_step_general(st, ge.system, k, mode), ge.system);
                CHECK(std::abs(after - before) <= 1e-12 * std::max(1.0, std::abs(before)));
            }
        }
    }
}

TEST_CASE("registry resolves tags and applies overrides") {
    for (const std::string& tag : problem_tags()) CHECK_NOTHROW(make_problem(tag));
    CHECK_THROWS_AS(make_problem("nope"), DomainError);

    ProblemParams params;
    params.c0_override = 7.5;
    const ProblemInstance inst = make_problem("duffing", params);
    CHECK(std::get<OsdeSetup>(inst.setup).problem.C0 == 7.5);

    params.n = 32;
    CHECK(std::get<OsdeSetup>(make_problem("sine-gordon", params).setup).q0.size() == 32);
}
