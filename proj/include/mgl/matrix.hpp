#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "mgl/errors.hpp"

namespace mgl {

// Dense row-major matrix of doubles. Used for sample matrices (rows are
// observations), responsibilities and eigenvector bundles.
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), v_(rows * cols, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return v_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return v_[i * cols_ + j]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    std::span<double> row(std::size_t i) { return {v_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const {
        return {v_.data() + i * cols_, cols_};
    }

    const std::vector<double>& values() const { return v_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> v_;
};

// Symmetric matrix stored fully, row-major. Symmetry is an invariant:
// constructors check it and set() writes both mirror entries, so a
// SymMatrix is exactly symmetric at all times.
class SymMatrix {
public:
    SymMatrix() = default;

    explicit SymMatrix(std::size_t dim) : dim_(dim), v_(dim * dim, 0.0) {
        if (dim == 0) throw InvalidInput("SymMatrix dimension must be at least 1");
    }

    static SymMatrix identity(std::size_t dim) {
        SymMatrix m(dim);
        for (std::size_t i = 0; i < dim; ++i) m.v_[i * dim + i] = 1.0;
        return m;
    }

    static SymMatrix diagonal(const std::vector<double>& d) {
        SymMatrix m(d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m.v_[i * d.size() + i] = d[i];
        return m;
    }

    // Checked conversion: the input must be square and exactly symmetric.
    static SymMatrix from_matrix(const Matrix& m) {
        if (m.rows() != m.cols())
            throw InvalidInput("SymMatrix requires a square matrix");
        SymMatrix s(m.rows());
        for (std::size_t i = 0; i < m.rows(); ++i)
            for (std::size_t j = 0; j < m.cols(); ++j) {
                if (m(i, j) != m(j, i))
                    throw InvalidInput("matrix is not symmetric at (" +
                                       std::to_string(i) + "," + std::to_string(j) + ")");
                s.v_[i * m.cols() + j] = m(i, j);
            }
        return s;
    }

    // Trusted adoption of a full row-major buffer the caller guarantees to be
    // symmetric. Internal fast path for algorithms that build exact-symmetric
    // results by mirroring.
    static SymMatrix adopt_unchecked(std::size_t dim, std::vector<double> full) {
        SymMatrix m;
        m.dim_ = dim;
        m.v_ = std::move(full);
        return m;
    }

    double operator()(std::size_t i, std::size_t j) const { return v_[i * dim_ + j]; }

    // Writes (i,j) and (j,i) so the symmetry invariant cannot be broken.
    void set(std::size_t i, std::size_t j, double value) {
        v_[i * dim_ + j] = value;
        v_[j * dim_ + i] = value;
    }

    std::size_t dim() const { return dim_; }

    const std::vector<double>& values() const { return v_; }

    bool operator==(const SymMatrix&) const = default;

private:
    std::size_t dim_ = 0;
    std::vector<double> v_;
};

// A precision matrix is a symmetric matrix that the producing operation has
// certified positive definite (Cholesky succeeded).
using PrecisionMatrix = SymMatrix;

inline double frobenius_norm(const SymMatrix& m) {
    double s = 0.0;
    for (double x : m.values()) s += x * x;
    return std::sqrt(s);
}

inline double max_abs_diff(const SymMatrix& a, const SymMatrix& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i)
        d = std::max(d, std::abs(a.values()[i] - b.values()[i]));
    return d;
}

// Off-diagonal entrywise l1 norm, summed over ordered pairs (a != b), so each
// unordered pair counts twice. Matches the full-matrix l1 convention with the
// diagonal excluded.
inline double offdiag_abs_sum(const SymMatrix& m) {
    double s = 0.0;
    for (std::size_t a = 0; a < m.dim(); ++a)
        for (std::size_t b = a + 1; b < m.dim(); ++b) s += 2.0 * std::abs(m(a, b));
    return s;
}

}  // namespace mgl
