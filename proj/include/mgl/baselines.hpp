#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "mgl/glasso.hpp"
#include "mgl/linalg.hpp"
#include "mgl/matrix.hpp"
#include "mgl/mixture.hpp"
#include "mgl/rng.hpp"

namespace mgl {

struct KMeansResult {
    Matrix centers;  // K x D
    std::vector<std::size_t> labels;
    double inertia = 0.0;
    std::size_t iterations = 0;
};

namespace detail {

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

}  // namespace detail

// Lloyd's algorithm with k-means++ seeding. Empty clusters are repaired by
// reseeding them at the point currently farthest from its own center.
// inertia_trace, when given, records the inertia after every Lloyd update.
inline KMeansResult kmeans(const Matrix& x, std::size_t k, std::uint64_t seed,
                           std::size_t max_iter = 100,
                           std::vector<double>* inertia_trace = nullptr) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (k < 1) throw InvalidInput("cluster count must be at least 1");
    if (n < k) throw InvalidInput("need at least one sample per cluster");

    Rng rng(seed);
    Matrix centers(k, d);

    // k-means++: first center uniform, the rest proportional to squared
    // distance from the nearest chosen center.
    std::vector<double> dist2(n, std::numeric_limits<double>::infinity());
    {
        const std::size_t first = rng.uniform_index(n);
        std::copy(x.row(first).begin(), x.row(first).end(), centers.row(0).begin());
        for (std::size_t c = 1; c < k; ++c) {
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                dist2[i] = std::min(dist2[i], detail::squared_distance(x.row(i), centers.row(c - 1)));
                total += dist2[i];
            }
            std::size_t chosen;
            if (total > 0.0) {
                const double target = rng.uniform() * total;
                double cumulative = 0.0;
                chosen = n - 1;
                for (std::size_t i = 0; i < n; ++i) {
                    cumulative += dist2[i];
                    if (cumulative >= target) {
                        chosen = i;
                        break;
                    }
                }
            } else {
                chosen = rng.uniform_index(n);
            }
            std::copy(x.row(chosen).begin(), x.row(chosen).end(), centers.row(c).begin());
        }
    }

    KMeansResult result;
    result.labels.assign(n, 0);
    std::vector<std::size_t> counts(k);

    for (std::size_t iter = 1; iter <= max_iter; ++iter) {
        bool changed = iter == 1;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double best_d = detail::squared_distance(x.row(i), centers.row(0));
            for (std::size_t c = 1; c < k; ++c) {
                const double dc = detail::squared_distance(x.row(i), centers.row(c));
                if (dc < best_d) {
                    best_d = dc;
                    best = c;
                }
            }
            if (result.labels[i] != best) {
                result.labels[i] = best;
                changed = true;
            }
        }

        // Repair empty clusters before the mean update.
        std::fill(counts.begin(), counts.end(), std::size_t{0});
        for (std::size_t l : result.labels) ++counts[l];
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] > 0) continue;
            std::size_t farthest = 0;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[result.labels[i]] <= 1) continue;
                const double di =
                    detail::squared_distance(x.row(i), centers.row(result.labels[i]));
                if (di > far_d) {
                    far_d = di;
                    farthest = i;
                }
            }
            --counts[result.labels[farthest]];
            result.labels[farthest] = c;
            counts[c] = 1;
            changed = true;
        }

        for (std::size_t c = 0; c < k; ++c)
            std::fill(centers.row(c).begin(), centers.row(c).end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            auto center = centers.row(result.labels[i]);
            const auto xi = x.row(i);
            for (std::size_t a = 0; a < d; ++a) center[a] += xi[a];
        }
        for (std::size_t c = 0; c < k; ++c)
            for (std::size_t a = 0; a < d; ++a)
                centers(c, a) /= static_cast<double>(counts[c]);

        result.inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            result.inertia +=
                detail::squared_distance(x.row(i), centers.row(result.labels[i]));
        result.iterations = iter;
        if (inertia_trace) inertia_trace->push_back(result.inertia);
        if (!changed) break;
    }

    result.centers = std::move(centers);
    return result;
}

// Pipeline baseline: cluster the samples with k-means, then run one glasso
// per cluster on the cluster-centered covariance with uniform off-diagonal
// weight 2 lambda1 / N_c.
inline std::vector<PrecisionMatrix> kmeans_glasso(const Matrix& x, std::size_t k,
                                                  double lambda1, std::uint64_t seed,
                                                  const GlassoOptions& opt = {}) {
    const KMeansResult clusters = kmeans(x, k, seed);
    const std::size_t d = x.cols();

    std::vector<PrecisionMatrix> thetas;
    thetas.reserve(k);
    for (std::size_t c = 0; c < k; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < x.rows(); ++i)
            if (clusters.labels[i] == c) members.push_back(i);
        if (members.size() < 2) throw DegenerateComponent(c);

        std::vector<double> mean(d, 0.0);
        for (std::size_t i : members)
            for (std::size_t a = 0; a < d; ++a) mean[a] += x(i, a);
        for (double& m : mean) m /= static_cast<double>(members.size());

        std::vector<double> s(d * d, 0.0);
        for (std::size_t i : members)
            for (std::size_t a = 0; a < d; ++a) {
                const double xa = x(i, a) - mean[a];
                for (std::size_t b = a; b < d; ++b)
                    s[a * d + b] += xa * (x(i, b) - mean[b]);
            }
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = a; b < d; ++b) {
                s[a * d + b] /= static_cast<double>(members.size());
                s[b * d + a] = s[a * d + b];
            }
        const SymMatrix scatter = SymMatrix::adopt_unchecked(d, std::move(s));
        const PenaltyMatrix weights = PenaltyMatrix::uniform_offdiag(
            d, 2.0 * lambda1 / static_cast<double>(members.size()));
        thetas.push_back(solve_weighted_glasso(scatter, weights, nullptr, opt).theta);
    }
    return thetas;
}

// Spectral partition of the nodes of a weighted graph given by the absolute
// off-diagonal entries of theta: embed with the eigenvectors of the K
// smallest eigenvalues of the normalized Laplacian, row-normalize, k-means.
// Isolated nodes get an identity Laplacian row.
inline std::vector<std::size_t> spectral_partition(const SymMatrix& theta, std::size_t k,
                                                   std::uint64_t seed = 0) {
    const std::size_t d = theta.dim();
    if (d < k) throw InvalidInput("need at least one node per cluster");

    std::vector<double> degree(d, 0.0);
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b)
            if (a != b) degree[a] += std::abs(theta(a, b));

    SymMatrix laplacian = SymMatrix::identity(d);
    for (std::size_t a = 0; a < d; ++a) {
        if (degree[a] == 0.0) continue;  // isolated: keep identity row
        for (std::size_t b = a + 1; b < d; ++b) {
            if (degree[b] == 0.0) continue;
            const double affinity = std::abs(theta(a, b));
            if (affinity != 0.0)
                laplacian.set(a, b, -affinity / std::sqrt(degree[a] * degree[b]));
        }
    }

    const SymEigen eigen = sym_eigen(laplacian);
    Matrix embedding(d, k);
    for (std::size_t r = 0; r < d; ++r) {
        double norm = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            embedding(r, c) = eigen.vectors(r, c);
            norm += embedding(r, c) * embedding(r, c);
        }
        norm = std::sqrt(norm);
        if (norm > 1e-12)
            for (std::size_t c = 0; c < k; ++c) embedding(r, c) /= norm;
    }
    return kmeans(embedding, k, seed).labels;
}

// Restriction of theta to a node partition: sub-network c keeps the full
// diagonal plus the off-diagonal entries whose both endpoints lie in cluster
// c. Each output is positive definite (block-diagonal assembly of principal
// submatrices of a PD matrix).
inline std::vector<PrecisionMatrix> restrict_to_partition(const SymMatrix& theta,
                                                          const std::vector<std::size_t>& labels,
                                                          std::size_t k) {
    const std::size_t d = theta.dim();
    std::vector<PrecisionMatrix> out;
    out.reserve(k);
    for (std::size_t c = 0; c < k; ++c) {
        SymMatrix sub(d);
        for (std::size_t a = 0; a < d; ++a) {
            sub.set(a, a, theta(a, a));
            for (std::size_t b = a + 1; b < d; ++b)
                if (labels[a] == c && labels[b] == c) sub.set(a, b, theta(a, b));
        }
        out.push_back(std::move(sub));
    }
    return out;
}

// Baseline: one glasso on the pooled covariance, then spectral clustering of
// the resulting network into K node groups; sub-network k is the fitted
// precision restricted to group k. Deterministic given the data.
inline std::vector<PrecisionMatrix> glasso_spectral(const Matrix& x, std::size_t k,
                                                    double lambda1,
                                                    const GlassoOptions& opt = {}) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (d < k) throw InvalidInput("need at least one node per cluster");

    std::vector<double> s(d * d, 0.0);
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
    const PenaltyMatrix weights =
        PenaltyMatrix::uniform_offdiag(d, 2.0 * lambda1 / static_cast<double>(n));
    const PrecisionMatrix theta = solve_weighted_glasso(scatter, weights, nullptr, opt).theta;

    const std::vector<std::size_t> labels = spectral_partition(theta, k);
    return restrict_to_partition(theta, labels, k);
}

// The joint-graphical-lasso stand-in: exactly the mixture estimator with the
// mutual exclusivity term switched off.
inline FitResult jgl_like(const Matrix& x, std::size_t k, double lambda1,
                          std::uint64_t seed, FitConfig cfg = {}) {
    cfg.components = k;
    cfg.lambda1 = lambda1;
    cfg.lambda2 = 0.0;
    cfg.seed = seed;
    return fit(x, cfg);
}

}  // namespace mgl
