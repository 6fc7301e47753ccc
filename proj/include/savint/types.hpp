#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "savint/errors.hpp"

namespace savint {

// ---------------------------------------------------------------------------
// Dynamic real vector
// ---------------------------------------------------------------------------

class Vec {
public:
    Vec() = default;
    explicit Vec(std::size_t n) : data_(n, 0.0) {}
    Vec(std::initializer_list<double> init) : data_(init) {}
    explicit Vec(std::vector<double> v) : data_(std::move(v)) {}

    std::size_t size() const { return data_.size(); }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }
    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    auto begin() { return data_.begin(); }
    auto end() { return data_.end(); }
    auto begin() const { return data_.begin(); }
    auto end() const { return data_.end(); }
    const std::vector<double>& raw() const { return data_; }

    Vec& operator+=(const Vec& o) {
        require_same_size(o);
        for (std::size_t i = 0; i < size(); ++i) data_[i] += o[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        require_same_size(o);
        for (std::size_t i = 0; i < size(); ++i) data_[i] -= o[i];
        return *this;
    }
    Vec& operator*=(double a) {
        for (double& x : data_) x *= a;
        return *this;
    }

    friend Vec operator+(Vec a, const Vec& b) { return a += b; }
    friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
    friend Vec operator*(double a, Vec v) { return v *= a; }
    friend Vec operator*(Vec v, double a) { return v *= a; }
    friend Vec operator-(Vec v) { return v *= -1.0; }

    friend bool operator==(const Vec& a, const Vec& b) { return a.data_ == b.data_; }

private:
    void require_same_size(const Vec& o) const {
        if (o.size() != size())
            throw DimensionError("vector size mismatch: " + std::to_string(size()) +
                                 " vs " + std::to_string(o.size()));
    }
    std::vector<double> data_;
};

inline double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw DimensionError("dot: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double max_abs(const Vec& a) {
    double m = 0.0;
    for (double x : a) m = std::max(m, std::abs(x));
    return m;
}

inline bool all_finite(const Vec& a) {
    for (double x : a)
        if (!std::isfinite(x)) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Fixed 3-vector, used throughout the charged-particle code
// ---------------------------------------------------------------------------

struct Vec3 {
    std::array<double, 3> e{0.0, 0.0, 0.0};

    Vec3() = default;
    Vec3(double x, double y, double z) : e{x, y, z} {}

    double& operator[](std::size_t i) { return e[i]; }
    double operator[](std::size_t i) const { return e[i]; }

    Vec3& operator+=(const Vec3& o) {
        for (int i = 0; i < 3; ++i) e[i] += o.e[i];
        return *this;
    }
    Vec3& operator-=(const Vec3& o) {
        for (int i = 0; i < 3; ++i) e[i] -= o.e[i];
        return *this;
    }
    Vec3& operator*=(double a) {
        for (double& x : e) x *= a;
        return *this;
    }
    friend Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
    friend Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
    friend Vec3 operator*(double a, Vec3 v) { return v *= a; }
    friend Vec3 operator*(Vec3 v, double a) { return v *= a; }
    friend Vec3 operator-(Vec3 v) { return v *= -1.0; }
    friend bool operator==(const Vec3& a, const Vec3& b) { return a.e == b.e; }
};

inline double dot(const Vec3& a, const Vec3& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0]};
}

inline bool all_finite(const Vec3& a) {
    return std::isfinite(a[0]) && std::isfinite(a[1]) && std::isfinite(a[2]);
}

// ---------------------------------------------------------------------------
// Dense row-major matrix
// ---------------------------------------------------------------------------

class Mat {
public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    static Mat identity(std::size_t n) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    Mat& operator+=(const Mat& o) {
        require_same_shape(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    Mat& operator-=(const Mat& o) {
        require_same_shape(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    Mat& operator*=(double a) {
        for (double& x : data_) x *= a;
        return *this;
    }
    friend Mat operator+(Mat a, const Mat& b) { return a += b; }
    friend Mat operator-(Mat a, const Mat& b) { return a -= b; }
    friend Mat operator*(double a, Mat m) { return m *= a; }
    friend Mat operator*(Mat m, double a) { return m *= a; }

    friend Vec operator*(const Mat& m, const Vec& v) {
        if (v.size() != m.cols_) throw DimensionError("mat*vec: size mismatch");
        Vec r(m.rows_);
        for (std::size_t i = 0; i < m.rows_; ++i) {
            double s = 0.0;
            const double* row = m.data_.data() + i * m.cols_;
            for (std::size_t j = 0; j < m.cols_; ++j) s += row[j] * v[j];
            r[i] = s;
        }
        return r;
    }

    friend Mat operator*(const Mat& a, const Mat& b) {
        if (a.cols_ != b.rows_) throw DimensionError("mat*mat: size mismatch");
        Mat r(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const double aik = a(i, k);
                if (aik == 0.0) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) r(i, j) += aik * b(k, j);
            }
        return r;
    }

private:
    void require_same_shape(const Mat& o) const {
        if (o.rows_ != rows_ || o.cols_ != cols_)
            throw DimensionError("matrix shape mismatch");
    }
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

inline Mat transpose(const Mat& m) {
    Mat r(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) r(j, i) = m(i, j);
    return r;
}

inline double frobenius_norm(const Mat& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j) * m(i, j);
    return std::sqrt(s);
}

/// Maximum absolute column sum (the induced 1-norm).
inline double one_norm(const Mat& m) {
    double best = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i) s += std::abs(m(i, j));
        best = std::max(best, s);
    }
    return best;
}

inline double max_abs(const Mat& m) {
    double best = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) best = std::max(best, std::abs(m(i, j)));
    return best;
}

inline bool all_finite(const Mat& m) {
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            if (!std::isfinite(m(i, j))) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Fixed 3x3 matrix
// ---------------------------------------------------------------------------

struct Mat3 {
    std::array<double, 9> e{};  // row-major

    static Mat3 identity() {
        Mat3 m;
        m(0, 0) = m(1, 1) = m(2, 2) = 1.0;
        return m;
    }

    double& operator()(std::size_t i, std::size_t j) { return e[3 * i + j]; }
    double operator()(std::size_t i, std::size_t j) const { return e[3 * i + j]; }

    Mat3& operator+=(const Mat3& o) {
        for (int i = 0; i < 9; ++i) e[i] += o.e[i];
        return *this;
    }
    Mat3& operator-=(const Mat3& o) {
        for (int i = 0; i < 9; ++i) e[i] -= o.e[i];
        return *this;
    }
    Mat3& operator*=(double a) {
        for (double& x : e) x *= a;
        return *this;
    }
    friend Mat3 operator+(Mat3 a, const Mat3& b) { return a += b; }
    friend Mat3 operator-(Mat3 a, const Mat3& b) { return a -= b; }
    friend Mat3 operator*(double a, Mat3 m) { return m *= a; }

    friend Vec3 operator*(const Mat3& m, const Vec3& v) {
        Vec3 r;
        for (int i = 0; i < 3; ++i)
            r[i] = m(i, 0) * v[0] + m(i, 1) * v[1] + m(i, 2) * v[2];
        return r;
    }
    friend Mat3 operator*(const Mat3& a, const Mat3& b) {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                r(i, j) = a(i, 0) * b(0, j) + a(i, 1) * b(1, j) + a(i, 2) * b(2, j);
        return r;
    }
};

inline Mat3 transpose(const Mat3& m) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(j, i) = m(i, j);
    return r;
}

/// Outer product a b'.
inline Mat3 outer(const Vec3& a, const Vec3& b) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = a[i] * b[j];
    return r;
}

inline double det(const Mat3& m) {
    return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
           m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
           m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

inline double max_abs(const Mat3& m) {
    double best = 0.0;
    for (double x : m.e) best = std::max(best, std::abs(x));
    return best;
}

}  // namespace savint
