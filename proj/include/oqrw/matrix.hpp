/** @file
 * Dense complex matrices and the numerical predicates the rest of the
 * library relies on. Storage is row-major double-precision; everything
 * here is a pure value operation.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "oqrw/error.hpp"

namespace oqrw {

using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;

class ComplexMatrix {
public:
    ComplexMatrix() = default;

    // Zero-filled rows x cols matrix.
    ComplexMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), entries_(rows * cols, Complex{0.0, 0.0}) {
        if (rows == 0 || cols == 0)
            throw DimensionError("ComplexMatrix: dimensions must be positive");
    }

    ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows) {
        rows_ = rows.size();
        if (rows_ == 0) throw DimensionError("ComplexMatrix: empty literal");
        cols_ = rows.begin()->size();
        if (cols_ == 0) throw DimensionError("ComplexMatrix: empty row");
        entries_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_)
                throw DimensionError("ComplexMatrix: ragged literal");
            entries_.insert(entries_.end(), r.begin(), r.end());
        }
    }

    static ComplexMatrix zero(std::size_t rows, std::size_t cols) {
        return ComplexMatrix(rows, cols);
    }

    static ComplexMatrix identity(std::size_t n) {
        ComplexMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool is_square() const { return rows_ == cols_; }
    bool empty() const { return entries_.empty(); }

    Complex& operator()(std::size_t r, std::size_t c) { return entries_[r * cols_ + c]; }
    const Complex& operator()(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }

    const std::vector<Complex>& entries() const { return entries_; }
    std::vector<Complex>& entries() { return entries_; }

    ComplexMatrix& operator+=(const ComplexMatrix& o) {
        require_same_shape(o, "operator+=");
        for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] += o.entries_[i];
        return *this;
    }

    ComplexMatrix& operator-=(const ComplexMatrix& o) {
        require_same_shape(o, "operator-=");
        for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] -= o.entries_[i];
        return *this;
    }

    ComplexMatrix& operator*=(Complex a) {
        for (auto& e : entries_) e *= a;
        return *this;
    }

private:
    void require_same_shape(const ComplexMatrix& o, const char* what) const {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw DimensionError(std::string(what) + ": shape mismatch");
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Complex> entries_;
};

inline ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
inline ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
inline ComplexMatrix operator*(Complex a, ComplexMatrix m) { return m *= a; }
inline ComplexMatrix operator*(double a, ComplexMatrix m) { return m *= Complex{a, 0.0}; }
inline ComplexMatrix operator*(ComplexMatrix m, Complex a) { return m *= a; }

inline ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols() != b.rows())
        throw DimensionError("operator*: inner dimensions differ");
    ComplexMatrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const Complex aik = a(i, k);
            if (aik == Complex{0.0, 0.0}) continue;
            for (std::size_t j = 0; j < b.cols(); ++j)
                out(i, j) += aik * b(k, j);
        }
    return out;
}

// Conjugate transpose. Involutive bit-for-bit.
inline ComplexMatrix adjoint(const ComplexMatrix& m) {
    ComplexMatrix out(m.cols(), m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c)
            out(c, r) = std::conj(m(r, c));
    return out;
}

// Kronecker product; block (i1,j1) of the result is a(i1,j1) * b.
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i1 = 0; i1 < a.rows(); ++i1)
        for (std::size_t j1 = 0; j1 < a.cols(); ++j1) {
            const Complex f = a(i1, j1);
            if (f == Complex{0.0, 0.0}) continue;
            for (std::size_t i2 = 0; i2 < b.rows(); ++i2)
                for (std::size_t j2 = 0; j2 < b.cols(); ++j2)
                    out(i1 * b.rows() + i2, j1 * b.cols() + j2) = f * b(i2, j2);
        }
    return out;
}

inline Complex trace(const ComplexMatrix& m) {
    if (!m.is_square())
        throw DimensionError("trace: matrix is not square");
    Complex t{0.0, 0.0};
    for (std::size_t i = 0; i < m.rows(); ++i) t += m(i, i);
    return t;
}

inline double max_abs(const ComplexMatrix& m) {
    double v = 0.0;
    for (const auto& e : m.entries()) v = std::max(v, std::abs(e));
    return v;
}

inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionError("max_abs_diff: shape mismatch");
    double v = 0.0;
    for (std::size_t i = 0; i < a.entries().size(); ++i)
        v = std::max(v, std::abs(a.entries()[i] - b.entries()[i]));
    return v;
}

inline bool all_finite(const ComplexMatrix& m) {
    for (const auto& e : m.entries())
        if (!std::isfinite(e.real()) || !std::isfinite(e.imag())) return false;
    return true;
}

inline bool is_hermitian(const ComplexMatrix& m, double tol) {
    if (!m.is_square())
        throw DimensionError("is_hermitian: matrix is not square");
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c)
            if (std::abs(m(r, c) - std::conj(m(c, r))) > tol) return false;
    return true;
}

// Ascending eigenvalues of a (numerically) Hermitian matrix.
inline std::vector<double> hermitian_eigenvalues(const ComplexMatrix& m) {
    if (!m.is_square())
        throw DimensionError("hermitian_eigenvalues: matrix is not square");
    const auto n = static_cast<Eigen::Index>(m.rows());
    Eigen::MatrixXcd em(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c)
            em(r, c) = m(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(em, Eigen::EigenvaluesOnly);
    std::vector<double> out(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
    return out;
}

// Hermitian within tol entrywise and all eigenvalues >= -tol.
inline bool is_positive_semidefinite(const ComplexMatrix& m, double tol = 1e-9) {
    if (!m.is_square())
        throw DimensionError("is_positive_semidefinite: matrix is not square");
    if (!is_hermitian(m, tol)) return false;
    const auto evals = hermitian_eigenvalues(m);
    return evals.empty() || evals.front() >= -tol;
}

// ||m* m - I||_max <= tol.
inline bool is_unitary(const ComplexMatrix& m, double tol = 1e-10) {
    if (!m.is_square())
        throw DimensionError("is_unitary: matrix is not square");
    const ComplexMatrix g = adjoint(m) * m;
    double dev = 0.0;
    for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < g.cols(); ++c) {
            const Complex want = (r == c) ? Complex{1.0, 0.0} : Complex{0.0, 0.0};
            dev = std::max(dev, std::abs(g(r, c) - want));
        }
    return dev <= tol;
}

inline ComplexMatrix hermitize(const ComplexMatrix& m) {
    ComplexMatrix out = m;
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c)
            out(r, c) = 0.5 * (m(r, c) + std::conj(m(c, r)));
    return out;
}

// --- small vector helpers (pure chirality states) ---

inline ComplexVector operator*(const ComplexMatrix& m, const ComplexVector& v) {
    if (m.cols() != v.size())
        throw DimensionError("matrix-vector product: length mismatch");
    ComplexVector out(m.rows(), Complex{0.0, 0.0});
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c)
            out[r] += m(r, c) * v[c];
    return out;
}

inline double norm_squared(const ComplexVector& v) {
    double s = 0.0;
    for (const auto& e : v) s += std::norm(e);
    return s;
}

// |v><v| as a density matrix.
inline ComplexMatrix outer(const ComplexVector& v) {
    ComplexMatrix out(v.size(), v.size());
    for (std::size_t r = 0; r < v.size(); ++r)
        for (std::size_t c = 0; c < v.size(); ++c)
            out(r, c) = v[r] * std::conj(v[c]);
    return out;
}

} // namespace oqrw
