#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

#include "mgl/defaults.hpp"
#include "mgl/matrix.hpp"

namespace mgl {

// Undirected edge set of a graph on `dim` nodes: sorted unordered pairs
// (a, b) with a < b, no self-loops.
struct EdgeSet {
    std::size_t dim = 0;
    std::vector<std::pair<std::size_t, std::size_t>> edges;  // sorted, unique
};

// Off-diagonal support of a precision matrix: edge (a, b) iff
// |Theta[a,b]| > eps.
inline EdgeSet support(const SymMatrix& theta, double eps = kDefaultEdgeEps) {
    if (eps < 0.0) throw InvalidInput("edge threshold must be non-negative");
    EdgeSet set;
    set.dim = theta.dim();
    for (std::size_t a = 0; a < theta.dim(); ++a)
        for (std::size_t b = a + 1; b < theta.dim(); ++b)
            if (std::abs(theta(a, b)) > eps) set.edges.emplace_back(a, b);
    return set;
}

inline std::size_t intersection_size(const EdgeSet& a, const EdgeSet& b) {
    std::size_t count = 0;
    auto it = b.edges.begin();
    for (const auto& e : a.edges) {
        while (it != b.edges.end() && *it < e) ++it;
        if (it == b.edges.end()) break;
        if (*it == e) ++count;
    }
    return count;
}

// Edge-detection F1 = 2 N_d / (N_a + N_g) with N_d the correctly detected
// edges, N_a all detected edges and N_g all true edges; 0 when nothing true
// was detected, 1 when both sets are empty.
inline double f1(const EdgeSet& detected, const EdgeSet& truth) {
    if (detected.dim != truth.dim) throw InvalidInput("edge sets have different dimensions");
    const std::size_t nd = intersection_size(detected, truth);
    if (nd == 0) return (detected.edges.empty() && truth.edges.empty()) ? 1.0 : 0.0;
    return 2.0 * static_cast<double>(nd) /
           static_cast<double>(detected.edges.size() + truth.edges.size());
}

// F1 evaluation with component alignment: mixture labels are arbitrary, so
// all K! pairings of estimated to true components are scored and the
// permutation maximizing mean F1 wins (ties: lexicographically smallest).
struct EvalReport {
    std::vector<double> per_component_f1;  // truth k vs estimated permutation[k]
    double mean_f1 = 0.0;
    std::vector<std::size_t> permutation;  // estimated index matched to truth k
    std::size_t overlap_count = 0;         // shared support among estimated pairs
};

inline EvalReport align_and_score(const std::vector<PrecisionMatrix>& estimated,
                                  const std::vector<PrecisionMatrix>& truth,
                                  double eps = kDefaultEdgeEps) {
    const std::size_t k = truth.size();
    if (estimated.size() != k) throw InvalidInput("component counts differ");
    if (k == 0) throw InvalidInput("need at least one component");
    if (k > 8) throw InvalidInput("alignment supports at most 8 components");
    for (std::size_t c = 0; c < k; ++c)
        if (estimated[c].dim() != truth[0].dim() || truth[c].dim() != truth[0].dim())
            throw InvalidInput("component dimensions differ");

    std::vector<EdgeSet> est(k), tru(k);
    for (std::size_t c = 0; c < k; ++c) {
        est[c] = support(estimated[c], eps);
        tru[c] = support(truth[c], eps);
    }

    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    EvalReport best;
    best.mean_f1 = -1.0;
    do {
        std::vector<double> scores(k);
        double sum = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            scores[c] = f1(est[perm[c]], tru[c]);
            sum += scores[c];
        }
        const double mean = sum / static_cast<double>(k);
        if (mean > best.mean_f1) {
            best.mean_f1 = mean;
            best.per_component_f1 = std::move(scores);
            best.permutation = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j)
            best.overlap_count += intersection_size(est[i], est[j]);
    return best;
}

}  // namespace mgl
