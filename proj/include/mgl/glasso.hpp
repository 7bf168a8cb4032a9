#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "mgl/linalg.hpp"
#include "mgl/matrix.hpp"

namespace mgl {

// Proximal operator of t * |x|.
inline double soft_threshold(double x, double t) {
    if (x > t) return x - t;
    if (x < -t) return x + t;
    return 0.0;
}

// Element-wise penalty weights for the weighted graphical lasso. Symmetric,
// non-negative, and identically zero on the diagonal: the l1 term applies to
// off-diagonal entries only.
class PenaltyMatrix {
public:
    PenaltyMatrix() = default;

    explicit PenaltyMatrix(std::size_t dim) : dim_(dim), w_(dim * dim, 0.0) {
        if (dim == 0) throw InvalidInput("PenaltyMatrix dimension must be at least 1");
    }

    static PenaltyMatrix uniform_offdiag(std::size_t dim, double lambda) {
        if (lambda < 0.0) throw InvalidInput("penalty weight must be non-negative");
        PenaltyMatrix p(dim);
        for (std::size_t a = 0; a < dim; ++a)
            for (std::size_t b = 0; b < dim; ++b)
                if (a != b) p.w_[a * dim + b] = lambda;
        return p;
    }

    double operator()(std::size_t a, std::size_t b) const { return w_[a * dim_ + b]; }

    void set(std::size_t a, std::size_t b, double weight) {
        if (a == b) throw InvalidInput("diagonal penalty weights are fixed at zero");
        if (weight < 0.0) throw InvalidInput("penalty weight must be non-negative");
        w_[a * dim_ + b] = weight;
        w_[b * dim_ + a] = weight;
    }

    std::size_t dim() const { return dim_; }

    double mean_offdiag() const {
        if (dim_ < 2) return 0.0;
        double s = 0.0;
        for (std::size_t a = 0; a < dim_; ++a)
            for (std::size_t b = 0; b < dim_; ++b)
                if (a != b) s += w_[a * dim_ + b];
        return s / static_cast<double>(dim_ * (dim_ - 1));
    }

    const std::vector<double>& values() const { return w_; }

private:
    std::size_t dim_ = 0;
    std::vector<double> w_;
};

struct SolverReport {
    std::size_t iterations = 0;
    double final_objective = 0.0;
    bool converged = false;
    double kkt_residual = 0.0;
};

struct GlassoOptions {
    double tol = 1e-6;
    std::size_t max_iter = 500;
};

struct GlassoSolution {
    PrecisionMatrix theta;
    SolverReport report;
};

// tr(S Theta) over full matrices.
inline double trace_product(const SymMatrix& s, const SymMatrix& theta) {
    double t = 0.0;
    const auto& a = s.values();
    const auto& b = theta.values();
    for (std::size_t i = 0; i < a.size(); ++i) t += a[i] * b[i];
    return t;
}

// Penalty term sum_{a,b} Lambda[a,b] |Theta[a,b]| (full-matrix sum; each
// unordered off-diagonal pair contributes twice).
inline double penalty_value(const PenaltyMatrix& lambda, const SymMatrix& theta) {
    double p = 0.0;
    const auto& w = lambda.values();
    const auto& t = theta.values();
    for (std::size_t i = 0; i < w.size(); ++i) p += w[i] * std::abs(t[i]);
    return p;
}

// Full objective tr(S Theta) - log|Theta| + sum Lambda |Theta|.
inline double glasso_objective(const SymMatrix& s, const SymMatrix& theta,
                               const PenaltyMatrix& lambda) {
    const CholeskyFactor f = cholesky_or_throw(theta);
    return trace_product(s, theta) - f.log_det() + penalty_value(lambda, theta);
}

// Max violation of the stationarity conditions at Theta with W = Theta^{-1}:
// |S - W + Lambda sign(Theta)| on the support, max(0, |S - W| - Lambda) off
// it. Zero exactly at a stationary point.
inline double kkt_residual(const SymMatrix& s, const PrecisionMatrix& theta,
                           const PenaltyMatrix& lambda) {
    const SymMatrix w = spd_inverse(cholesky_or_throw(theta));
    double r = 0.0;
    const std::size_t n = s.dim();
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a; b < n; ++b) {
            const double g = s(a, b) - w(a, b);
            const double t = theta(a, b);
            double v;
            if (t != 0.0)
                v = std::abs(g + lambda(a, b) * (t > 0.0 ? 1.0 : -1.0));
            else
                v = std::max(0.0, std::abs(g) - lambda(a, b));
            r = std::max(r, v);
        }
    return r;
}

namespace detail {

// Builds the default starting point diag(1 / (S_aa + mean off-diagonal
// penalty)), floored away from zero so degenerate inputs stay finite.
inline PrecisionMatrix default_glasso_init(const SymMatrix& s, const PenaltyMatrix& lambda) {
    const double shift = lambda.mean_offdiag();
    std::vector<double> d(s.dim());
    for (std::size_t a = 0; a < s.dim(); ++a)
        d[a] = 1.0 / std::max(s(a, a) + shift, 1e-12);
    return SymMatrix::diagonal(d);
}

}  // namespace detail

// Weighted graphical lasso
//
//   minimize_{Theta > 0}  tr(S Theta) - log|Theta| + sum_{a,b} Lambda[a,b] |Theta[a,b]|
//
// by proximal gradient (ISTA) with backtracking. Each step soft-thresholds
// Theta - t (S - Theta^{-1}) entrywise; t is halved until the candidate is
// positive definite and the smooth part satisfies the quadratic upper bound,
// which makes the full objective non-increasing across accepted steps.
// Convergence requires both a small step (max entry change < tol) and a KKT
// residual below 10 * tol; otherwise the best iterate is returned with
// report.converged = false.
//
// objective_trace, when given, receives the objective after every accepted
// step.
inline GlassoSolution solve_weighted_glasso(const SymMatrix& s, const PenaltyMatrix& lambda,
                                            const PrecisionMatrix* init = nullptr,
                                            const GlassoOptions& opt = {},
                                            std::vector<double>* objective_trace = nullptr) {
    const std::size_t n = s.dim();
    if (lambda.dim() != n) throw InvalidInput("penalty dimension does not match S");
    if (!(opt.tol > 0.0)) throw InvalidInput("solver tolerance must be positive");
    for (std::size_t a = 0; a < n; ++a)
        if (s(a, a) < 0.0) throw InvalidInput("S has a negative diagonal entry");

    PrecisionMatrix theta = init ? *init : detail::default_glasso_init(s, lambda);
    if (init && init->dim() != n) throw InvalidInput("init dimension does not match S");

    auto factor = cholesky(theta);
    if (!factor) throw InvalidInput("initial iterate is not positive definite");

    double smooth = trace_product(s, theta) - factor->log_det();

    const double s_norm = frobenius_norm(s);
    double step = s_norm > 0.0 ? 1.0 / s_norm : 1.0;

    SolverReport report;
    report.final_objective = smooth + penalty_value(lambda, theta);
    if (objective_trace) objective_trace->push_back(report.final_objective);

    std::vector<double> grad(n * n);
    std::vector<double> cand(n * n);

    for (std::size_t iter = 1; iter <= opt.max_iter; ++iter) {
        const SymMatrix w = spd_inverse(*factor);
        for (std::size_t i = 0; i < n * n; ++i)
            grad[i] = s.values()[i] - w.values()[i];

        // Probe a larger step each iteration; backtracking trims it again.
        // Keeps the step matched to local curvature instead of the worst
        // curvature seen so far.
        step *= 2.0;

        bool accepted = false;
        SymMatrix next;
        std::optional<CholeskyFactor> next_factor;
        double next_smooth = 0.0;
        double max_change = 0.0;

        for (int halving = 0; halving <= 60; ++halving) {
            // Candidate built on the upper triangle and mirrored: exactly
            // symmetric by construction.
            for (std::size_t a = 0; a < n; ++a)
                for (std::size_t b = a; b < n; ++b) {
                    const double x = theta(a, b) - step * grad[a * n + b];
                    const double v = soft_threshold(x, step * lambda(a, b));
                    cand[a * n + b] = v;
                    cand[b * n + a] = v;
                }
            SymMatrix c = SymMatrix::adopt_unchecked(n, cand);

            next_factor = cholesky(c);
            if (next_factor) {
                double inner = 0.0, dist2 = 0.0, change = 0.0;
                for (std::size_t i = 0; i < n * n; ++i) {
                    const double d = c.values()[i] - theta.values()[i];
                    inner += grad[i] * d;
                    dist2 += d * d;
                    change = std::max(change, std::abs(d));
                }
                const double cand_smooth = trace_product(s, c) - next_factor->log_det();
                if (cand_smooth <= smooth + inner + dist2 / (2.0 * step) + 1e-12) {
                    next = std::move(c);
                    next_smooth = cand_smooth;
                    max_change = change;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }

        if (!accepted) {
            // Step failure: no PD, sufficiently decreasing candidate within
            // 60 halvings. Return the best iterate, flagged.
            report.iterations = iter - 1;
            report.converged = false;
            report.kkt_residual = kkt_residual(s, theta, lambda);
            report.final_objective = smooth + penalty_value(lambda, theta);
            return {std::move(theta), report};
        }

        theta = std::move(next);
        factor = std::move(next_factor);
        smooth = next_smooth;
        report.iterations = iter;
        report.final_objective = smooth + penalty_value(lambda, theta);
        if (objective_trace) objective_trace->push_back(report.final_objective);

        if (max_change < opt.tol) {
            report.kkt_residual = kkt_residual(s, theta, lambda);
            if (report.kkt_residual < 10.0 * opt.tol) {
                report.converged = true;
                return {std::move(theta), report};
            }
        }
    }

    report.converged = false;
    report.kkt_residual = kkt_residual(s, theta, lambda);
    return {std::move(theta), report};
}

}  // namespace mgl
