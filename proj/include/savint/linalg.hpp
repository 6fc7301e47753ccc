#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "savint/errors.hpp"
#include "savint/types.hpp"

namespace savint {

// ---------------------------------------------------------------------------
// Symmetric eigendecomposition (cyclic Jacobi)
// ---------------------------------------------------------------------------

struct SpectralDecomp {
    std::vector<double> eigenvalues;  // ascending
    Mat basis;                        // orthogonal, eigenvectors in columns
};

namespace detail {

inline void jacobi_rotate(Mat& a, Mat& v, std::size_t p, std::size_t q) {
    const std::size_t n = a.rows();
    const double apq = a(p, q);
    if (apq == 0.0) return;
    const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
    const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                     (std::abs(tau) + std::sqrt(1.0 + tau * tau));
    const double c = 1.0 / std::sqrt(1.0 + t * t);
    const double s = t * c;

    const double app = a(p, p), aqq = a(q, q);
    a(p, p) = app - t * apq;
    a(q, q) = aqq + t * apq;
    a(p, q) = 0.0;
    a(q, p) = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i != p && i != q) {
            const double aip = a(i, p), aiq = a(i, q);
            a(i, p) = c * aip - s * aiq;
            a(p, i) = a(i, p);
            a(i, q) = s * aip + c * aiq;
            a(q, i) = a(i, q);
        }
        const double vip = v(i, p), viq = v(i, q);
        v(i, p) = c * vip - s * viq;
        v(i, q) = s * vip + c * viq;
    }
}

inline double off_diagonal_norm(const Mat& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
}

}  // namespace detail

inline SpectralDecomp sym_eig(const Mat& a) {
    if (a.rows() != a.cols())
        throw DimensionError("sym_eig: matrix is not square");
    const std::size_t n = a.rows();
    const double scale = frobenius_norm(a);
    {
        double asym = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                asym = std::max(asym, std::abs(a(i, j) - a(j, i)));
        if (asym > 1e-12 * std::max(1.0, scale))
            throw SymmetryError("sym_eig: matrix is not symmetric");
    }

    Mat w = a;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double m = 0.5 * (w(i, j) + w(j, i));
            w(i, j) = m;
            w(j, i) = m;
        }
    Mat v = Mat::identity(n);

    // One polish sweep after crossing the threshold: quadratic convergence
    // drives the residual to rounding level instead of just below threshold.
    const double threshold = 1e-14 * scale;
    bool converged = false;
    for (int sweep = 0; sweep < 100; ++sweep) {
        if (detail::off_diagonal_norm(w) <= threshold) {
            if (converged) break;
            converged = true;
        }
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q)
                detail::jacobi_rotate(w, v, p, q);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return w(i, i) < w(j, j); });

    SpectralDecomp d;
    d.eigenvalues.resize(n);
    d.basis = Mat(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        d.eigenvalues[k] = w(order[k], order[k]);
        for (std::size_t i = 0; i < n; ++i) d.basis(i, k) = v(i, order[k]);
    }
    // Newton orthogonalization step B(3I - B'B)/2: the accumulated rotation
    // product is orthogonal only to a few hundred ulps, which matters when a
    // kernel built from it is applied millions of times.
    Mat corr = transpose(d.basis) * d.basis;
    corr *= -1.0;
    for (std::size_t i = 0; i < n; ++i) corr(i, i) += 3.0;
    d.basis = 0.5 * (d.basis * corr);
    return d;
}

// ---------------------------------------------------------------------------
// Even matrix functions of h*sqrt(A)/eps
// ---------------------------------------------------------------------------

enum class EvenFn { cos, sinc, g1, g2m };

/// Scalar evaluation of the even functions cos z, sin(z)/z, (1-cos z)/z^2 and
/// cos(z)-1.  Below z = 1e-4 the degree-6 Taylor polynomial is used to avoid
/// cancellation.
inline double even_fn(EvenFn which, double z) {
    const double z2 = z * z;
    if (std::abs(z) < 1e-4) {
        switch (which) {
            case EvenFn::cos:  return 1.0 - z2 / 2.0 + z2 * z2 / 24.0 - z2 * z2 * z2 / 720.0;
            case EvenFn::sinc: return 1.0 - z2 / 6.0 + z2 * z2 / 120.0 - z2 * z2 * z2 / 5040.0;
            case EvenFn::g1:   return 0.5 - z2 / 24.0 + z2 * z2 / 720.0 - z2 * z2 * z2 / 40320.0;
            case EvenFn::g2m:  return -z2 / 2.0 + z2 * z2 / 24.0 - z2 * z2 * z2 / 720.0;
        }
    }
    switch (which) {
        case EvenFn::cos:  return std::cos(z);
        case EvenFn::sinc: return std::sin(z) / z;
        case EvenFn::g1:   return (1.0 - std::cos(z)) / z2;
        case EvenFn::g2m:  return std::cos(z) - 1.0;
    }
    return 0.0;  // unreachable
}

namespace detail {

/// Checks the PSD precondition and returns eigenvalues clamped at zero.
inline std::vector<double> psd_eigenvalues(const SpectralDecomp& d) {
    double lmax = 0.0;
    for (double lam : d.eigenvalues) lmax = std::max(lmax, std::abs(lam));
    std::vector<double> out = d.eigenvalues;
    for (double& lam : out) {
        if (lam < -1e-10 * std::max(1.0, lmax))
            throw NotPsdError("matrix has eigenvalue " + std::to_string(lam) +
                              "; not positive semi-definite");
        lam = std::max(lam, 0.0);
    }
    return out;
}

/// basis * diag(fvals) * basis', symmetrized.
inline Mat assemble(const Mat& basis, const std::vector<double>& fvals) {
    const std::size_t n = basis.rows();
    Mat r(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                s += basis(i, k) * fvals[k] * basis(j, k);
            r(i, j) = s;
            r(j, i) = s;
        }
    return r;
}

}  // namespace detail

/// f(h*sqrt(A)/eps) for symmetric positive semi-definite A.
inline Mat even_matrix_function(const Mat& a, double h, double eps, EvenFn which) {
    const SpectralDecomp d = sym_eig(a);
    const std::vector<double> lams = detail::psd_eigenvalues(d);
    std::vector<double> fvals(lams.size());
    for (std::size_t i = 0; i < lams.size(); ++i)
        fvals[i] = even_fn(which, h * std::sqrt(lams[i]) / eps);
    return detail::assemble(d.basis, fvals);
}

// ---------------------------------------------------------------------------
// LU solve with partial pivoting
// ---------------------------------------------------------------------------

/// Solves A X = B for dense square A.
inline Mat lu_solve(Mat a, Mat b) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.rows() != n)
        throw DimensionError("lu_solve: incompatible shapes");
    std::vector<std::size_t> piv(n);
    std::iota(piv.begin(), piv.end(), 0);

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t imax = k;
        double best = std::abs(a(k, k));
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > best) {
                best = std::abs(a(i, k));
                imax = i;
            }
        if (best == 0.0) throw Error("lu_solve: singular matrix");
        if (imax != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(imax, j));
            for (std::size_t j = 0; j < b.cols(); ++j) std::swap(b(k, j), b(imax, j));
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double m = a(i, k) / a(k, k);
            a(i, k) = 0.0;
            if (m == 0.0) continue;
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= m * a(k, j);
            for (std::size_t j = 0; j < b.cols(); ++j) b(i, j) -= m * b(k, j);
        }
    }
    for (std::size_t kk = n; kk-- > 0;) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double s = b(kk, j);
            for (std::size_t i = kk + 1; i < n; ++i) s -= a(kk, i) * b(i, j);
            b(kk, j) = s / a(kk, kk);
        }
    }
    return b;
}

inline Vec lu_solve(const Mat& a, const Vec& rhs) {
    Mat b(rhs.size(), 1);
    for (std::size_t i = 0; i < rhs.size(); ++i) b(i, 0) = rhs[i];
    Mat x = lu_solve(a, b);
    Vec out(rhs.size());
    for (std::size_t i = 0; i < rhs.size(); ++i) out[i] = x(i, 0);
    return out;
}

// ---------------------------------------------------------------------------
// Dense matrix exponential (scaling and squaring, Pade [13/13])
// ---------------------------------------------------------------------------

inline Mat dense_exp(const Mat& m) {
    if (m.rows() != m.cols()) throw DimensionError("dense_exp: not square");
    if (!all_finite(m)) throw DomainError("dense_exp: non-finite entries");
    const std::size_t n = m.rows();

    int squarings = 0;
    double nrm = one_norm(m);
    while (nrm > 0.5) {
        nrm *= 0.5;
        ++squarings;
    }
    Mat a = m * std::ldexp(1.0, -squarings);

    static const double b[14] = {
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
        1187353796428800.0,  129060195264000.0,   10559470521600.0,
        670442572800.0,      33522128640.0,       1323241920.0,
        40840800.0,          960960.0,            16380.0,
        182.0,               1.0};

    const Mat id = Mat::identity(n);
    const Mat a2 = a * a;
    const Mat a4 = a2 * a2;
    const Mat a6 = a4 * a2;

    Mat u = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2);
    u += b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id;
    u = a * u;
    Mat v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2);
    v += b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;

    Mat r = lu_solve(v - u, v + u);
    for (int i = 0; i < squarings; ++i) r = r * r;
    return r;
}

/// phi(M) = (exp(M) - I) M^{-1}, defined for singular M as the top-right
/// block of exp([[M, I], [0, 0]]).
inline Mat dense_phi(const Mat& m) {
    if (m.rows() != m.cols()) throw DimensionError("dense_phi: not square");
    const std::size_t n = m.rows();
    Mat block(2 * n, 2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) block(i, j) = m(i, j);
        block(i, n + i) = 1.0;
    }
    const Mat e = dense_exp(block);
    Mat r(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) r(i, j) = e(i, n + j);
    return r;
}

// ---------------------------------------------------------------------------
// Rank-1 solve
// ---------------------------------------------------------------------------

/// Solves (I + gamma F') q = l through the scalar reduction
/// F'q = F'l / (1 + F'gamma).
inline Vec rank1_solve(const Vec& gamma, const Vec& f, const Vec& l) {
    const double denom = 1.0 + dot(f, gamma);
    if (denom <= 1e-14)
        throw SingularDenominatorError(
            "rank1_solve: 1 + F'gamma = " + std::to_string(denom) +
            " is not safely positive");
    const double fq = dot(f, l) / denom;
    Vec q = l;
    q -= fq * gamma;
    return q;
}

// ---------------------------------------------------------------------------
// 3D rotation exponentials
// ---------------------------------------------------------------------------

/// The matrix of v -> v x b.
inline Mat3 cross_matrix(const Vec3& b) {
    Mat3 m;
    m(0, 1) = b[2];
    m(0, 2) = -b[1];
    m(1, 0) = -b[2];
    m(1, 2) = b[0];
    m(2, 0) = b[1];
    m(2, 1) = -b[0];
    return m;
}

/// exp(t * cross_matrix(b)) via the Rodrigues formula, with a series fallback
/// for small rotation angles.
inline Mat3 rodrigues_exp(const Vec3& b, double t) {
    const double nb = norm(b);
    const double theta = t * nb;
    double alpha, beta;  // exp = I + alpha*Bhat + beta*Bhat^2
    if (std::abs(theta) < 1e-6) {
        alpha = t * (1.0 - theta * theta / 6.0);
        beta = 0.5 * t * t * (1.0 - theta * theta / 12.0);
    } else {
        alpha = std::sin(theta) / nb;
        beta = (1.0 - std::cos(theta)) / (nb * nb);
    }
    const Mat3 bh = cross_matrix(b);
    Mat3 r = Mat3::identity();
    r += alpha * bh;
    r += beta * (bh * bh);
    // One orthonormalization step, R(3I - R'R)/2, pushes the rounding-level
    // orthogonality defect to second order; repeated application of the same
    // rotation then cannot drift the speed.
    Mat3 rtr = transpose(r) * r;
    Mat3 corr;
    corr(0, 0) = corr(1, 1) = corr(2, 2) = 3.0;
    corr -= rtr;
    corr *= 0.5;
    return r * corr;
}

}  // namespace savint
