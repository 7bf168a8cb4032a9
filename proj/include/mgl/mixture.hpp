#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "mgl/glasso.hpp"
#include "mgl/linalg.hpp"
#include "mgl/matrix.hpp"
#include "mgl/rng.hpp"

namespace mgl {

inline constexpr double kLogTwoPi = 1.8378770664093454836;

// K-component zero-mean Gaussian mixture parameterized by precision
// matrices: weights phi (positive, summing to 1) and one positive-definite
// Theta per component.
struct MixtureModel {
    std::vector<double> phi;
    std::vector<PrecisionMatrix> thetas;

    std::size_t components() const { return phi.size(); }
    std::size_t dim() const { return thetas.empty() ? 0 : thetas.front().dim(); }
};

// Throws InvalidInput unless weights form a distribution and every
// component precision passes Cholesky.
inline void validate_model(const MixtureModel& model) {
    if (model.phi.empty() || model.phi.size() != model.thetas.size())
        throw InvalidInput("model must have one weight per component");
    double sum = 0.0;
    for (double p : model.phi) {
        if (!(p > 0.0)) throw InvalidInput("mixture weights must be positive");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw InvalidInput("mixture weights must sum to 1");
    for (std::size_t k = 0; k < model.thetas.size(); ++k) {
        if (model.thetas[k].dim() != model.dim())
            throw InvalidInput("component dimensions differ");
        if (!cholesky(model.thetas[k]))
            throw InvalidInput("component " + std::to_string(k) +
                               " precision is not positive definite");
    }
}

struct FitConfig {
    std::size_t components = 2;  // K
    double lambda1 = 0.0;        // l1 strength, global scale of Eq. objective
    double lambda2 = 0.0;        // mutual exclusivity strength
    std::size_t max_em_iter = 200;
    double em_tol = 1e-5;
    GlassoOptions solver{};
    std::uint64_t seed = 0;
};

struct FitTrace {
    struct Entry {
        double objective;   // penalized objective after this (M, E) pair
        double nll;         // mixture negative log likelihood
        double mer;         // unscaled mutual-exclusivity value
        double max_change;  // max parameter change versus previous iteration
    };
    std::vector<Entry> entries;
    std::size_t em_iterations = 0;
    bool converged = false;
};

struct FitResult {
    MixtureModel model;
    Matrix responsibilities;  // N x K, rows sum to 1
    FitTrace trace;
};

// log N(x | 0, Theta^{-1}) = 1/2 log|Theta| - D/2 log 2pi - 1/2 x^T Theta x.
// chol must be the factor of theta.
inline double log_density(std::span<const double> x, const PrecisionMatrix& theta,
                          const CholeskyFactor& chol) {
    const std::size_t d = theta.dim();
    double quad = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
        double s = 0.0;
        for (std::size_t b = 0; b < d; ++b) s += theta(a, b) * x[b];
        quad += x[a] * s;
    }
    return 0.5 * chol.log_det() - 0.5 * static_cast<double>(d) * kLogTwoPi - 0.5 * quad;
}

struct EStepResult {
    Matrix responsibilities;
    double nll;
};

// Posterior responsibilities r_ik = phi_k N(x_i|0,Theta_k^{-1}) / sum_j ...,
// computed in the log domain with log-sum-exp, plus the mixture NLL.
inline EStepResult e_step(const Matrix& x, const MixtureModel& model) {
    const std::size_t n = x.rows();
    const std::size_t k = model.components();
    std::vector<CholeskyFactor> factors;
    factors.reserve(k);
    std::vector<double> log_phi(k);
    for (std::size_t c = 0; c < k; ++c) {
        factors.push_back(cholesky_or_throw(model.thetas[c]));
        log_phi[c] = std::log(model.phi[c]);
    }

    EStepResult out{Matrix(n, k), 0.0};
    std::vector<double> lk(k);
    for (std::size_t i = 0; i < n; ++i) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            lk[c] = log_phi[c] + log_density(x.row(i), model.thetas[c], factors[c]);
            best = std::max(best, lk[c]);
        }
        double sum = 0.0;
        for (std::size_t c = 0; c < k; ++c) sum += std::exp(lk[c] - best);
        const double lse = best + std::log(sum);
        for (std::size_t c = 0; c < k; ++c) out.responsibilities(i, c) = std::exp(lk[c] - lse);
        out.nll -= lse;
    }
    return out;
}

// Unscaled mutual exclusivity sum_{i != j} tr(|Theta_i| |Theta_j|) over
// ordered component pairs, diagonals excluded. Zero exactly when no two
// components share a nonzero off-diagonal position.
inline double mer_value(const std::vector<PrecisionMatrix>& thetas) {
    const std::size_t k = thetas.size();
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j) {
            if (thetas[i].dim() != thetas[j].dim())
                throw InvalidInput("components must share one dimension");
            const std::size_t d = thetas[i].dim();
            double pair = 0.0;
            for (std::size_t a = 0; a < d; ++a)
                for (std::size_t b = 0; b < d; ++b)
                    if (a != b) pair += std::abs(thetas[i](a, b)) * std::abs(thetas[j](a, b));
            total += 2.0 * pair;  // (i,j) and (j,i)
        }
    return total;
}

// Penalized objective: NLL + lambda1 sum_k |Theta_k|_1,offdiag + lambda2 MER.
inline double penalized_objective(const Matrix& x, const MixtureModel& model,
                                  double lambda1, double lambda2) {
    double value = e_step(x, model).nll;
    for (const auto& theta : model.thetas) value += lambda1 * offdiag_abs_sum(theta);
    value += lambda2 * mer_value(model.thetas);
    return value;
}

namespace detail {

// Responsibility-weighted scatter S_k = sum_i r_ik x_i x_i^T / N_k,
// mirrored exact-symmetric.
inline SymMatrix weighted_scatter(const Matrix& x, const Matrix& resp, std::size_t k,
                                  double mass) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    std::vector<double> s(d * d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = resp(i, k);
        if (w == 0.0) continue;
        const auto xi = x.row(i);
        for (std::size_t a = 0; a < d; ++a) {
            const double wa = w * xi[a];
            for (std::size_t b = a; b < d; ++b) s[a * d + b] += wa * xi[b];
        }
    }
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = a; b < d; ++b) {
            s[a * d + b] /= mass;
            s[b * d + a] = s[a * d + b];
        }
    return SymMatrix::adopt_unchecked(d, std::move(s));
}

}  // namespace detail

// One M step: phi_k <- N_k / N, then one block-coordinate pass over the
// components. Component k solves a weighted glasso on its scatter S_k with
// weights
//
//   Lambda_k[a,b] = 2 (lambda1 + 2 lambda2 sum_{j != k} |Theta_j[a,b]|) / N_k,
//
// warm-started from the current Theta_k; later components see the updated
// earlier ones. The leading 2/N_k rescales component k's block of the global
// objective into the solver's normalized form, so the pass never increases
// the penalized objective. The inner 2 counts the ordered pairs (k,j), (j,k)
// that both contain Theta_k.
inline MixtureModel m_step(const Matrix& x, const Matrix& resp, const MixtureModel& model,
                           const FitConfig& cfg) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    const std::size_t k = model.components();

    std::vector<double> mass(k, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < k; ++c) mass[c] += resp(i, c);
    for (std::size_t c = 0; c < k; ++c)
        if (mass[c] < static_cast<double>(d) * 1e-3) throw DegenerateComponent(c);

    MixtureModel next = model;
    for (std::size_t c = 0; c < k; ++c) next.phi[c] = mass[c] / static_cast<double>(n);

    for (std::size_t c = 0; c < k; ++c) {
        const SymMatrix scatter = detail::weighted_scatter(x, resp, c, mass[c]);
        PenaltyMatrix weights(d);
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = a + 1; b < d; ++b) {
                double coupling = 0.0;
                for (std::size_t j = 0; j < k; ++j)
                    if (j != c) coupling += std::abs(next.thetas[j](a, b));
                weights.set(a, b, 2.0 * (cfg.lambda1 + 2.0 * cfg.lambda2 * coupling) / mass[c]);
            }
        next.thetas[c] =
            solve_weighted_glasso(scatter, weights, &next.thetas[c], cfg.solver).theta;
    }
    return next;
}

// Initialization scheme: each observation is assigned a class label; its
// responsibility is 0.9 there and 0.1/(K-1) elsewhere (1.0 when K = 1).
// Every Theta_k starts from the same whole-sample glasso solution and phi
// starts uniform.
inline FitResult initialize_from_labels(const Matrix& x, const FitConfig& cfg,
                                        std::span<const std::size_t> labels) {
    const std::size_t n = x.rows();
    const std::size_t k = cfg.components;
    if (k < 1) throw InvalidInput("component count must be at least 1");
    if (n < k) throw InvalidInput("need at least one observation per component");
    if (labels.size() != n) throw InvalidInput("one label per observation required");

    FitResult init;
    init.responsibilities = Matrix(n, k);
    const double off = k > 1 ? 0.1 / static_cast<double>(k - 1) : 0.0;
    const double on = k > 1 ? 0.9 : 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] >= k) throw InvalidInput("label out of range");
        for (std::size_t c = 0; c < k; ++c)
            init.responsibilities(i, c) = (c == labels[i]) ? on : off;
    }

    // Whole-sample scatter S = X^T X / N; uniform penalty matches the
    // K = 1, lambda2 = 0 M-step subproblem.
    std::vector<double> s(x.cols() * x.cols(), 0.0);
    const std::size_t d = x.cols();
    for (std::size_t i = 0; i < n; ++i) {
        const auto xi = x.row(i);
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = a; b < d; ++b) s[a * d + b] += xi[a] * xi[b];
    }
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = a; b < d; ++b) {
            s[a * d + b] /= static_cast<double>(n);
            s[b * d + a] = s[a * d + b];
        }
    const SymMatrix scatter = SymMatrix::adopt_unchecked(d, std::move(s));
    const PenaltyMatrix uniform = PenaltyMatrix::uniform_offdiag(
        d, 2.0 * cfg.lambda1 / static_cast<double>(n));
    PrecisionMatrix theta0 = solve_weighted_glasso(scatter, uniform, nullptr, cfg.solver).theta;

    init.model.phi.assign(k, 1.0 / static_cast<double>(k));
    init.model.thetas.assign(k, theta0);
    return init;
}

inline FitResult initialize(const Matrix& x, const FitConfig& cfg) {
    Rng rng(cfg.seed);
    std::vector<std::size_t> labels(x.rows());
    for (auto& l : labels) l = rng.uniform_index(cfg.components);
    return initialize_from_labels(x, cfg, labels);
}

namespace detail {

inline double max_model_change(const MixtureModel& a, const MixtureModel& b) {
    double change = 0.0;
    for (std::size_t c = 0; c < a.components(); ++c) {
        change = std::max(change, std::abs(a.phi[c] - b.phi[c]));
        change = std::max(change, max_abs_diff(a.thetas[c], b.thetas[c]));
    }
    return change;
}

inline FitResult run_em(const Matrix& x, const FitConfig& cfg, FitResult state) {
    double previous = 0.0;
    bool have_previous = false;

    for (std::size_t iter = 1; iter <= cfg.max_em_iter; ++iter) {
        MixtureModel updated = m_step(x, state.responsibilities, state.model, cfg);
        const double change = max_model_change(updated, state.model);
        state.model = std::move(updated);

        EStepResult e = e_step(x, state.model);
        state.responsibilities = std::move(e.responsibilities);

        double objective = e.nll;
        for (const auto& theta : state.model.thetas)
            objective += cfg.lambda1 * offdiag_abs_sum(theta);
        const double mer = mer_value(state.model.thetas);
        objective += cfg.lambda2 * mer;

        state.trace.entries.push_back({objective, e.nll, mer, change});
        state.trace.em_iterations = iter;

        if (have_previous &&
            std::abs(previous - objective) <= cfg.em_tol * std::max(1.0, std::abs(previous))) {
            state.trace.converged = true;
            break;
        }
        previous = objective;
        have_previous = true;
    }
    return state;
}

}  // namespace detail

// Full estimator: initialize, then alternate M and E steps until the
// relative change of the penalized objective drops below em_tol or
// max_em_iter is reached. The M step runs first, consuming the
// initialization's responsibilities.
inline FitResult fit(const Matrix& x, const FitConfig& cfg) {
    return detail::run_em(x, cfg, initialize(x, cfg));
}

// As fit(), but with caller-chosen initial class labels instead of seeded
// random ones.
inline FitResult fit_from_labels(const Matrix& x, const FitConfig& cfg,
                                 std::span<const std::size_t> labels) {
    return detail::run_em(x, cfg, initialize_from_labels(x, cfg, labels));
}

}  // namespace mgl
