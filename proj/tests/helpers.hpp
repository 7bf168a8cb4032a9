#pragma once

// Shared test utilities: random SPD generators and independent oracles used
// to freeze expected values. Everything here is deliberately written
// straight-line, without going through the library paths under test.

#include <cmath>
#include <random>
#include <vector>

#include "mgl/glasso.hpp"
#include "mgl/matrix.hpp"

namespace testutil {

// Random symmetric positive definite matrix A A^T + I.
inline mgl::SymMatrix random_spd(std::size_t dim, std::mt19937_64& gen, double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, scale);
    std::vector<std::vector<double>> a(dim, std::vector<double>(dim));
    for (auto& row : a)
        for (double& v : row) v = normal(gen);
    mgl::SymMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = i; j < dim; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < dim; ++k) s += a[i][k] * a[j][k];
            m.set(i, j, i == j ? s + 1.0 : s);
        }
    return m;
}

// Determinant by cofactor expansion, dim <= 4. Independent of the Cholesky
// path it checks.
inline double direct_determinant(const mgl::SymMatrix& m) {
    const std::size_t n = m.dim();
    std::vector<double> a(m.values());
    auto det = [&](auto&& self, std::vector<double> w, std::size_t d) -> double {
        if (d == 1) return w[0];
        double sum = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            std::vector<double> minor;
            minor.reserve((d - 1) * (d - 1));
            for (std::size_t r = 1; r < d; ++r)
                for (std::size_t cc = 0; cc < d; ++cc)
                    if (cc != c) minor.push_back(w[r * d + cc]);
            const double sign = (c % 2 == 0) ? 1.0 : -1.0;
            sum += sign * w[c] * self(self, std::move(minor), d - 1);
        }
        return sum;
    };
    return det(det, std::move(a), n);
}

// Objective of the 2x2 weighted glasso with uniform off-diagonal penalty,
// full-matrix l1 convention (the off-diagonal entry counts twice).
inline double objective_2x2(double s11, double s22, double s12, double lambda, double t11,
                            double t22, double t12) {
    const double det = t11 * t22 - t12 * t12;
    return s11 * t11 + s22 * t22 + 2.0 * s12 * t12 - std::log(det) +
           2.0 * lambda * std::abs(t12);
}

struct GridMin {
    double objective;
    double t11, t22, t12;
};

// Brute-force minimization of the 2x2 glasso objective over SPD matrices by
// multi-pass grid refinement on (t11, t22, t12).
inline GridMin grid_search_2x2(const mgl::SymMatrix& s, double lambda) {
    double lo11 = 1e-3, hi11 = 10.0 / std::max(1e-3, s(0, 0));
    double lo22 = 1e-3, hi22 = 10.0 / std::max(1e-3, s(1, 1));
    double lo12 = -std::sqrt(hi11 * hi22), hi12 = std::sqrt(hi11 * hi22);

    GridMin best{std::numeric_limits<double>::infinity(), 1.0, 1.0, 0.0};
    const int pts = 33;
    for (int pass = 0; pass < 6; ++pass) {
        for (int i = 0; i < pts; ++i)
            for (int j = 0; j < pts; ++j)
                for (int k = 0; k < pts; ++k) {
                    const double t11 = lo11 + (hi11 - lo11) * i / (pts - 1);
                    const double t22 = lo22 + (hi22 - lo22) * j / (pts - 1);
                    const double t12 = lo12 + (hi12 - lo12) * k / (pts - 1);
                    if (t11 <= 0 || t22 <= 0 || t11 * t22 - t12 * t12 <= 1e-12) continue;
                    const double obj =
                        objective_2x2(s(0, 0), s(1, 1), s(0, 1), lambda, t11, t22, t12);
                    if (obj < best.objective) best = {obj, t11, t22, t12};
                }
        const double w11 = (hi11 - lo11) / (pts - 1), w22 = (hi22 - lo22) / (pts - 1),
                     w12 = (hi12 - lo12) / (pts - 1);
        lo11 = best.t11 - 2 * w11;
        hi11 = best.t11 + 2 * w11;
        lo22 = best.t22 - 2 * w22;
        hi22 = best.t22 + 2 * w22;
        lo12 = best.t12 - 2 * w12;
        hi12 = best.t12 + 2 * w12;
        lo11 = std::max(lo11, 1e-6);
        lo22 = std::max(lo22, 1e-6);
    }
    return best;
}

}  // namespace testutil
