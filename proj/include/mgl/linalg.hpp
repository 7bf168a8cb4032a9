#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <vector>

#include "mgl/matrix.hpp"

namespace mgl {

// Lower-triangular Cholesky factor L with m = L * L^T. A successfully
// constructed factor is the positive-definiteness certificate used
// throughout: strictly positive pivots are guaranteed.
class CholeskyFactor {
public:
    // Returns nullopt if some pivot is <= 0 (input not positive definite);
    // the offending pivot index is reported through bad_pivot when given.
    static std::optional<CholeskyFactor> compute(const SymMatrix& m,
                                                 std::size_t* bad_pivot = nullptr) {
        const std::size_t n = m.dim();
        CholeskyFactor f;
        f.dim_ = n;
        f.lower_.assign(n * n, 0.0);
        double* l = f.lower_.data();
        for (std::size_t j = 0; j < n; ++j) {
            double d = m(j, j);
            for (std::size_t k = 0; k < j; ++k) d -= l[j * n + k] * l[j * n + k];
            if (!(d > 0.0)) {  // catches d <= 0 and NaN
                if (bad_pivot) *bad_pivot = j;
                return std::nullopt;
            }
            const double ljj = std::sqrt(d);
            l[j * n + j] = ljj;
            for (std::size_t i = j + 1; i < n; ++i) {
                double s = m(i, j);
                for (std::size_t k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
                l[i * n + j] = s / ljj;
            }
        }
        return f;
    }

    std::size_t dim() const { return dim_; }

    double operator()(std::size_t i, std::size_t j) const { return lower_[i * dim_ + j]; }

    const std::vector<double>& lower() const { return lower_; }

    double log_det() const {
        double s = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) s += std::log(lower_[i * dim_ + i]);
        return 2.0 * s;
    }

    // Solves L L^T x = b in place.
    void solve_in_place(std::span<double> b) const {
        const double* l = lower_.data();
        for (std::size_t i = 0; i < dim_; ++i) {
            double s = b[i];
            for (std::size_t k = 0; k < i; ++k) s -= l[i * dim_ + k] * b[k];
            b[i] = s / l[i * dim_ + i];
        }
        for (std::size_t ii = dim_; ii-- > 0;) {
            double s = b[ii];
            for (std::size_t k = ii + 1; k < dim_; ++k) s -= l[k * dim_ + ii] * b[k];
            b[ii] = s / l[ii * dim_ + ii];
        }
    }

    // Solves L^T y = z in place. If z is standard normal, y has covariance
    // (L L^T)^{-1}, which is how the synthesizer draws from N(0, Theta^{-1}).
    void solve_transposed_in_place(std::span<double> z) const {
        const double* l = lower_.data();
        for (std::size_t ii = dim_; ii-- > 0;) {
            double s = z[ii];
            for (std::size_t k = ii + 1; k < dim_; ++k) s -= l[k * dim_ + ii] * z[k];
            z[ii] = s / l[ii * dim_ + ii];
        }
    }

    // x^T m x for the factored matrix m, computed as |L^T x|^2.
    double quadratic_form(std::span<const double> x) const {
        double q = 0.0;
        const double* l = lower_.data();
        for (std::size_t j = 0; j < dim_; ++j) {
            double s = 0.0;
            for (std::size_t i = j; i < dim_; ++i) s += l[i * dim_ + j] * x[i];
            q += s * s;
        }
        return q;
    }

private:
    std::size_t dim_ = 0;
    std::vector<double> lower_;
};

inline std::optional<CholeskyFactor> cholesky(const SymMatrix& m,
                                              std::size_t* bad_pivot = nullptr) {
    return CholeskyFactor::compute(m, bad_pivot);
}

// Cholesky that must succeed; throws NotPositiveDefinite otherwise.
inline CholeskyFactor cholesky_or_throw(const SymMatrix& m) {
    std::size_t pivot = 0;
    auto f = CholeskyFactor::compute(m, &pivot);
    if (!f) throw NotPositiveDefinite(pivot);
    return *std::move(f);
}

inline double log_det(const CholeskyFactor& f) { return f.log_det(); }

// Inverse of the factored SPD matrix: first L^{-1} by forward substitution,
// then L^{-T} L^{-1}, mirrored so the result is exactly symmetric.
inline SymMatrix spd_inverse(const CholeskyFactor& f) {
    const std::size_t n = f.dim();
    const double* l = f.lower().data();
    std::vector<double> x(n * n, 0.0);  // X = L^{-1}, lower triangular
    for (std::size_t j = 0; j < n; ++j) {
        x[j * n + j] = 1.0 / l[j * n + j];
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = 0.0;
            for (std::size_t k = j; k < i; ++k) s += l[i * n + k] * x[k * n + j];
            x[i * n + j] = -s / l[i * n + i];
        }
    }
    std::vector<double> inv(n * n, 0.0);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a; b < n; ++b) {
            double s = 0.0;
            for (std::size_t k = b; k < n; ++k) s += x[k * n + a] * x[k * n + b];
            inv[a * n + b] = s;
            inv[b * n + a] = s;
        }
    return SymMatrix::adopt_unchecked(n, std::move(inv));
}

struct SymEigen {
    std::vector<double> values;  // ascending
    Matrix vectors;              // orthonormal columns, column i pairs values[i]
};

// Cyclic Jacobi eigendecomposition. Converges when the off-diagonal Frobenius
// mass drops below 1e-12 * |m|_F, at most 100 sweeps. Sized for D <= 200,
// which covers everything the spectral-clustering baseline needs.
inline SymEigen sym_eigen(const SymMatrix& m) {
    const std::size_t n = m.dim();
    std::vector<double> a(m.values());
    Matrix v(n, n);
    for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

    const double norm = frobenius_norm(m);
    const double stop = 1e-12 * norm;

    for (int sweep = 0; sweep < 100 && norm > 0.0; ++sweep) {
        double off2 = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off2 += a[p * n + q] * a[p * n + q];
        if (std::sqrt(2.0 * off2) < stop) break;

        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (apq == 0.0) continue;
                const double tau = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                const double app = a[p * n + p];
                const double aqq = a[q * n + q];
                a[p * n + p] = c * c * app - 2.0 * s * c * apq + s * s * aqq;
                a[q * n + q] = s * s * app + 2.0 * s * c * apq + c * c * aqq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    if (k == p || k == q) continue;
                    const double akp = a[k * n + p];
                    const double akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[p * n + k] = a[k * n + p];
                    a[k * n + q] = s * akp + c * akq;
                    a[q * n + k] = a[k * n + q];
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a[i * n + i] < a[j * n + j]; });

    SymEigen out;
    out.values.resize(n);
    out.vectors = Matrix(n, n);
    for (std::size_t c = 0; c < n; ++c) {
        out.values[c] = a[order[c] * n + order[c]];
        for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = v(r, order[c]);
    }
    return out;
}

}  // namespace mgl
