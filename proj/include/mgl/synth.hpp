#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include "mgl/linalg.hpp"
#include "mgl/matrix.hpp"
#include "mgl/rng.hpp"

namespace mgl {

// Unordered pair of block indices selecting one off-diagonal block of the
// precision matrix.
struct BlockPair {
    std::size_t first_block;
    std::size_t second_block;
};

// Ground-truth generator specification: K block-sparse precision matrices on
// p nodes split into `blocks` equal index ranges, with disjoint block pairs
// per component, plus per-component sample counts and observation noise.
struct SynthSpec {
    std::size_t dim = 8;         // p
    std::size_t components = 2;  // K
    std::size_t blocks = 4;      // B
    std::vector<std::vector<BlockPair>> block_assignment;
    double density = 0.8;
    double value_lo = 0.3;
    double value_hi = 0.6;
    std::vector<std::size_t> n_per_component;
    double noise_sigma = 0.0;
    // Rescale each Theta_k to unit model variances (Theta <- D Theta D with
    // D = diag(Theta^{-1})^{1/2}). Preserves support, partial correlations
    // and positive definiteness while putting every coordinate on one scale,
    // so noise sigma and penalty strength mean the same thing at every node.
    // The benchmark scenarios switch this on.
    bool unit_variance = false;
    // Variance of the nodes covered by a component's assigned block pairs,
    // relative to the remaining nodes (applied after unit_variance
    // normalization; 1 disables). Connected nodes fluctuating more than idle
    // ones is what makes the mixture identifiable from second moments alone;
    // another support-preserving diagonal rescaling.
    double active_variance = 1.0;
    std::uint64_t seed = 0;

    std::size_t total_samples() const {
        std::size_t n = 0;
        for (std::size_t c : n_per_component) n += c;
        return n;
    }
};

struct GroundTruth {
    std::vector<PrecisionMatrix> thetas_true;
    std::vector<std::size_t> labels;  // true component per row of samples
    Matrix samples;                   // N x p
};

// Round-robin distribution of disjoint block pairs: one pair per component,
// taken in lexicographic order, so consecutive components share a block
// (their active node sets overlap) while their edge positions stay disjoint.
// A shared block keeps the pooled network connected, which is what defeats
// partition-based baselines; components beyond the pair count receive none.
inline std::vector<std::vector<BlockPair>> round_robin_pairs(std::size_t blocks,
                                                             std::size_t components) {
    std::vector<std::vector<BlockPair>> assignment(components);
    std::size_t k = 0;
    for (std::size_t a = 0; a < blocks && k < components; ++a)
        for (std::size_t b = a + 1; b < blocks && k < components; ++b)
            assignment[k++].push_back({a, b});
    return assignment;
}

inline void validate_spec(const SynthSpec& spec) {
    if (spec.dim < 1) throw InvalidInput("dimension must be at least 1");
    if (spec.components < 1) throw InvalidInput("component count must be at least 1");
    if (spec.blocks < 1 || spec.dim % spec.blocks != 0)
        throw InvalidInput("dimension must be divisible by the block count");
    if (spec.block_assignment.size() != spec.components)
        throw InvalidInput("one block-pair list per component required");
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& pairs : spec.block_assignment)
        for (const BlockPair& p : pairs) {
            if (p.first_block >= p.second_block || p.second_block >= spec.blocks)
                throw InvalidInput("block pair indices must satisfy a < b < blocks");
            if (!seen.insert({p.first_block, p.second_block}).second)
                throw InvalidInput("block pairs must be disjoint across components");
        }
    if (!(spec.density > 0.0 && spec.density <= 1.0))
        throw InvalidInput("density must lie in (0, 1]");
    if (!(spec.value_lo > 0.0 && spec.value_lo <= spec.value_hi))
        throw InvalidInput("value range must satisfy 0 < lo <= hi");
    if (spec.n_per_component.size() != spec.components)
        throw InvalidInput("one sample count per component required");
    for (std::size_t n : spec.n_per_component)
        if (n < 1) throw InvalidInput("sample counts must be positive");
    if (spec.noise_sigma < 0.0) throw InvalidInput("noise sigma must be non-negative");
}

// Component k's precision matrix. Each assigned off-diagonal block of width
// w is filled at the requested density with a uniform-degree pattern (a
// union of max(1, round(density * w)) disjoint random permutations), so every
// node inside a block pair carries the same number of edges; entry values
// are uniform from the value range with random signs. Uniform degrees keep
// the edge strengths homogeneous after the diagonal is set to
// 1 + row absolute sum (strict diagonal dominance, hence positive definite
// with exactly the intended support). On full 2 x 2 blocks a sign is flipped
// if needed to keep the sign pattern full rank; rank-one sign blocks make
// the l1-penalized solution systematically fill in within-block entries,
// which no penalty level can remove.
inline PrecisionMatrix make_precision(const SynthSpec& spec, std::size_t k) {
    validate_spec(spec);
    if (k >= spec.components) throw InvalidInput("component index out of range");
    Rng rng = Rng::derived(spec.seed, 101 + k);

    const std::size_t p = spec.dim;
    const std::size_t width = p / spec.blocks;
    SymMatrix theta(p);
    for (const BlockPair& pair : spec.block_assignment[k]) {
        const std::size_t row0 = pair.first_block * width;
        const std::size_t col0 = pair.second_block * width;

        // Disjoint permutations: sigma composed with distinct cyclic shifts.
        const std::size_t degree = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(spec.density * static_cast<double>(width))));
        std::vector<std::size_t> sigma(width);
        for (std::size_t i = 0; i < width; ++i) sigma[i] = i;
        for (std::size_t i = width; i-- > 1;)
            std::swap(sigma[i], sigma[rng.uniform_index(i + 1)]);
        std::vector<std::size_t> shifts(width);
        for (std::size_t i = 0; i < width; ++i) shifts[i] = i;
        for (std::size_t i = width; i-- > 1;)
            std::swap(shifts[i], shifts[rng.uniform_index(i + 1)]);

        for (std::size_t g = 0; g < std::min(degree, width); ++g)
            for (std::size_t i = 0; i < width; ++i) {
                const std::size_t j = (sigma[i] + shifts[g]) % width;
                theta.set(row0 + i, col0 + j,
                          rng.uniform(spec.value_lo, spec.value_hi) * rng.sign());
            }

        if (width == 2 && std::min(degree, width) == 2) {
            const double s00 = theta(row0, col0), s01 = theta(row0, col0 + 1);
            const double s10 = theta(row0 + 1, col0), s11 = theta(row0 + 1, col0 + 1);
            const bool rank_one = ((s00 > 0) == (s11 > 0)) == ((s01 > 0) == (s10 > 0));
            if (rank_one) theta.set(row0 + 1, col0 + 1, -s11);
        }
    }
    for (std::size_t a = 0; a < p; ++a) {
        double row_sum = 0.0;
        for (std::size_t b = 0; b < p; ++b)
            if (b != a) row_sum += std::abs(theta(a, b));
        theta.set(a, a, 1.0 + row_sum);
    }
    if (spec.unit_variance) {
        const SymMatrix sigma = spd_inverse(cholesky_or_throw(theta));
        std::vector<double> scale(p);
        for (std::size_t a = 0; a < p; ++a) scale[a] = std::sqrt(sigma(a, a));
        if (spec.active_variance != 1.0) {
            const double shrink = 1.0 / std::sqrt(spec.active_variance);
            std::vector<bool> active(p, false);
            for (const BlockPair& pair : spec.block_assignment[k])
                for (std::size_t blk : {pair.first_block, pair.second_block})
                    for (std::size_t a = blk * width; a < (blk + 1) * width; ++a)
                        active[a] = true;
            for (std::size_t a = 0; a < p; ++a)
                if (active[a]) scale[a] *= shrink;
        }
        SymMatrix scaled(p);
        for (std::size_t a = 0; a < p; ++a)
            for (std::size_t b = a; b < p; ++b)
                scaled.set(a, b, scale[a] * theta(a, b) * scale[b]);
        return scaled;
    }
    return theta;
}

// Draws the labeled sample matrix: n_k rows per component from
// N(0, Theta_k^{-1}) via L^T y = z with z standard normal, plus independent
// N(0, sigma^2) observation noise, with rows finally shuffled.
inline GroundTruth sample(const SynthSpec& spec) {
    validate_spec(spec);
    GroundTruth truth;
    truth.thetas_true.reserve(spec.components);
    for (std::size_t k = 0; k < spec.components; ++k)
        truth.thetas_true.push_back(make_precision(spec, k));

    const std::size_t p = spec.dim;
    const std::size_t n = spec.total_samples();
    truth.samples = Matrix(n, p);
    truth.labels.resize(n);

    Rng rng = Rng::derived(spec.seed, 7);
    std::size_t row = 0;
    std::vector<double> z(p);
    for (std::size_t k = 0; k < spec.components; ++k) {
        const CholeskyFactor factor = cholesky_or_throw(truth.thetas_true[k]);
        for (std::size_t i = 0; i < spec.n_per_component[k]; ++i, ++row) {
            for (double& v : z) v = rng.normal();
            factor.solve_transposed_in_place(z);
            auto out = truth.samples.row(row);
            if (spec.noise_sigma > 0.0)
                for (std::size_t a = 0; a < p; ++a)
                    out[a] = z[a] + spec.noise_sigma * rng.normal();
            else
                std::copy(z.begin(), z.end(), out.begin());
            truth.labels[row] = k;
        }
    }

    // Fisher-Yates shuffle of rows and labels together.
    for (std::size_t i = n; i-- > 1;) {
        const std::size_t j = rng.uniform_index(i + 1);
        if (j == i) continue;
        std::swap(truth.labels[i], truth.labels[j]);
        for (std::size_t a = 0; a < p; ++a)
            std::swap(truth.samples(i, a), truth.samples(j, a));
    }
    return truth;
}

struct SweepRange {
    double lo;
    double hi;
};

// Published sweep range of each scenario; values outside are permitted
// (desk-scale extrapolation) but callers may warn.
inline SweepRange scenario_sweep_range(int id) {
    switch (id) {
        case 1: return {100.0, 520.0};
        case 2: return {0.1, 0.8};
        case 3: return {200.0, 1000.0};
        case 4: return {0.1, 0.8};
        default: throw InvalidInput("scenario id must be 1..4");
    }
}

// The four synthetic sweeps: 1 and 3 vary sample size at sigma = 0 for
// p = 8 and p = 20; 2 and 4 vary noise at fixed N. K = 2 throughout, N split
// evenly across components, defaults B = 4, density 0.8, values in
// [0.3, 0.6].
inline SynthSpec scenario(int id, double sweep_value) {
    SynthSpec spec;
    spec.components = 2;
    spec.blocks = 4;
    spec.density = 0.8;
    spec.value_lo = 1.3;
    spec.value_hi = 1.3;
    spec.unit_variance = true;
    spec.active_variance = 2.45;

    std::size_t n = 0;
    switch (id) {
        case 1:
            spec.dim = 8;
            spec.noise_sigma = 0.0;
            n = static_cast<std::size_t>(std::llround(sweep_value));
            break;
        case 2:
            spec.dim = 8;
            spec.noise_sigma = sweep_value;
            n = 500;
            break;
        case 3:
            spec.dim = 20;
            spec.noise_sigma = 0.0;
            n = static_cast<std::size_t>(std::llround(sweep_value));
            break;
        case 4:
            spec.dim = 20;
            spec.noise_sigma = sweep_value;
            n = 1000;
            break;
        default:
            throw InvalidInput("scenario id must be 1..4");
    }
    if (n < spec.components) throw InvalidInput("sample size too small for K = 2");
    spec.n_per_component = {(n + 1) / 2, n / 2};
    spec.block_assignment = round_robin_pairs(spec.blocks, spec.components);
    validate_spec(spec);
    return spec;
}

}  // namespace mgl
