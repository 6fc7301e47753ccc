#pragma once

// Brute-force reference computations used only by the test suites.  Nothing
// here may call into the code paths it is used to check.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "savint/types.hpp"

namespace oracles {

using savint::Mat;
using savint::Mat3;
using savint::Vec;
using savint::Vec3;

/// Truncated Taylor series for exp(M).
inline Mat taylor_exp(const Mat& m, int terms = 30) {
    Mat sum = Mat::identity(m.rows());
    Mat term = Mat::identity(m.rows());
    for (int k = 1; k <= terms; ++k) {
        term = term * m;
        term *= 1.0 / k;
        sum += term;
    }
    return sum;
}

/// Termwise Taylor summation of the even series f(h*sqrt(A)/eps) expressed in
/// powers of A, so no square root of A is ever taken.  Coefficient selects
/// cos, sinc, g1 or g2m through the factorial denominators:
///   cos:  sum (-1)^j z^(2j) / (2j)!
///   sinc: sum (-1)^j z^(2j) / (2j+1)!
///   g1:   sum (-1)^j z^(2j) / (2j+2)!
///   g2m:  cos - 1
enum class EvenSeries { cos, sinc, g1, g2m };

inline Mat taylor_even_series(const Mat& a, double h, double eps, EvenSeries which,
                              int terms = 40) {
    const std::size_t n = a.rows();
    const Mat z2 = (h * h / (eps * eps)) * a;  // (h sqrt(A)/eps)^2
    Mat sum(n, n);
    Mat power = Mat::identity(n);
    double factorial = 1.0;  // (2j)! running value
    for (int j = 0; j <= terms; ++j) {
        if (j > 0) {
            power = power * z2;
            factorial *= (2.0 * j - 1.0) * (2.0 * j);
        }
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        double denom = factorial;
        if (which == EvenSeries::sinc) denom *= 2.0 * j + 1.0;
        if (which == EvenSeries::g1) denom *= (2.0 * j + 1.0) * (2.0 * j + 2.0);
        sum += (sign / denom) * power;
    }
    if (which == EvenSeries::g2m) sum -= Mat::identity(n);
    return sum;
}

/// Classical RK4 with fixed substeps; local reference for one-step error
/// measurements.
template <typename Rhs>
Vec rk4_integrate(const Rhs& rhs, Vec y, double t0, double t1, int nsteps) {
    const double h = (t1 - t0) / nsteps;
    double t = t0;
    for (int i = 0; i < nsteps; ++i) {
        const Vec k1 = rhs(t, y);
        const Vec k2 = rhs(t + h / 2, y + (h / 2) * k1);
        const Vec k3 = rhs(t + h / 2, y + (h / 2) * k2);
        const Vec k4 = rhs(t + h, y + h * k3);
        y += (h / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += h;
    }
    return y;
}

// -- deterministic random data ----------------------------------------------

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& g, double lo = -1.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(g);
}

inline Vec random_vec(std::mt19937_64& g, std::size_t n, double lo = -1.0,
                      double hi = 1.0) {
    Vec v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = uniform(g, lo, hi);
    return v;
}

inline Vec3 random_vec3(std::mt19937_64& g, double lo = -1.0, double hi = 1.0) {
    return {uniform(g, lo, hi), uniform(g, lo, hi), uniform(g, lo, hi)};
}

inline Mat random_mat(std::mt19937_64& g, std::size_t rows, std::size_t cols,
                      double lo = -1.0, double hi = 1.0) {
    Mat m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = uniform(g, lo, hi);
    return m;
}

inline Mat random_symmetric(std::mt19937_64& g, std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            const double x = uniform(g);
            m(i, j) = x;
            m(j, i) = x;
        }
    return m;
}

/// S'S + delta*I: symmetric positive definite.
inline Mat random_spd(std::mt19937_64& g, std::size_t n, double delta = 0.1) {
    const Mat s = random_mat(g, n, n);
    Mat m = savint::transpose(s) * s;
    for (std::size_t i = 0; i < n; ++i) m(i, i) += delta;
    return m;
}

/// The canonical symplectic matrix [[0, I], [-I, 0]] of size 2d.
inline Mat canonical_j(std::size_t d) {
    Mat j(2 * d, 2 * d);
    for (std::size_t i = 0; i < d; ++i) {
        j(i, d + i) = 1.0;
        j(d + i, i) = -1.0;
    }
    return j;
}

}  // namespace oracles
