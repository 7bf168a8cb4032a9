#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "mgl/baselines.hpp"
#include "mgl/eval.hpp"
#include "mgl/synth.hpp"
#include "helpers.hpp"

using namespace mgl;

TEST_CASE("kmeans separates well-separated clouds") {
    std::mt19937_64 gen(3);
    std::normal_distribution<double> normal(0.0, 0.3);
    Matrix x(60, 2);
    for (std::size_t i = 0; i < 60; ++i) {
        const double cx = i < 30 ? -5.0 : 5.0;
        x(i, 0) = cx + normal(gen);
        x(i, 1) = normal(gen);
    }
    const KMeansResult result = kmeans(x, 2, 7);
    for (std::size_t i = 1; i < 30; ++i) CHECK(result.labels[i] == result.labels[0]);
    for (std::size_t i = 31; i < 60; ++i) CHECK(result.labels[i] == result.labels[30]);
    CHECK(result.labels[0] != result.labels[30]);
}

TEST_CASE("kmeans with one cluster returns the column means") {
    Matrix x(4, 2);
    x(0, 0) = 1.0;
    x(1, 0) = 3.0;
    x(2, 0) = 5.0;
    x(3, 0) = 7.0;
    x(0, 1) = -2.0;
    x(1, 1) = 2.0;
    const KMeansResult result = kmeans(x, 1, 0);
    CHECK_THAT(result.centers(0, 0), Catch::Matchers::WithinAbs(4.0, 1e-12));
    CHECK_THAT(result.centers(0, 1), Catch::Matchers::WithinAbs(0.0, 1e-12));
}

TEST_CASE("kmeans on unit square corners reaches zero inertia") {
    Matrix x(4, 2);
    x(1, 0) = 1.0;
    x(2, 1) = 1.0;
    x(3, 0) = 1.0;
    x(3, 1) = 1.0;
    const KMeansResult result = kmeans(x, 4, 11);
    CHECK(result.inertia == 0.0);
}

TEST_CASE("kmeans inertia is non-increasing and runs are deterministic") {
    std::mt19937_64 gen(13);
    std::normal_distribution<double> normal;
    Matrix x(200, 3);
    for (std::size_t i = 0; i < 200; ++i)
        for (std::size_t j = 0; j < 3; ++j) x(i, j) = normal(gen) + (i % 4);
    std::vector<double> trace;
    const KMeansResult a = kmeans(x, 4, 21, 100, &trace);
    REQUIRE(trace.size() >= 2);
    for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-10);
    const KMeansResult b = kmeans(x, 4, 21);
    CHECK(a.labels == b.labels);
    CHECK(a.inertia == b.inertia);

    CHECK_THROWS_AS(kmeans(x, 0, 0), InvalidInput);
    CHECK_THROWS_AS(kmeans(Matrix(2, 3), 3, 0), InvalidInput);
}

TEST_CASE("kmeans glasso on one homogeneous Gaussian yields similar components") {
    std::mt19937_64 gen(17);
    std::normal_distribution<double> normal;
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Matrix x(2000, 3);
        for (std::size_t i = 0; i < 2000; ++i) {
            x(i, 0) = normal(gen);
            x(i, 1) = 0.5 * x(i, 0) + std::sqrt(0.75) * normal(gen);
            x(i, 2) = normal(gen);
        }
        const auto thetas = kmeans_glasso(x, 2, 1.0, seed);
        double mean_diff = 0.0;
        for (std::size_t a = 0; a < 3; ++a)
            for (std::size_t b = 0; b < 3; ++b)
                mean_diff += std::abs(thetas[0](a, b) - thetas[1](a, b));
        worst = std::max(worst, mean_diff / 9.0);
    }
    CHECK(worst < 0.2);
}

TEST_CASE("kmeans glasso recovers supports when means separate the mixture") {
    // Mean-shifted mixture: k-means recovers the labels, per-cluster glasso
    // the supports.
    SynthSpec spec = scenario(1, 500);
    spec.seed = 23;
    GroundTruth truth = sample(spec);
    for (std::size_t i = 0; i < truth.samples.rows(); ++i) {
        const double shift = truth.labels[i] == 0 ? 25.0 : -25.0;
        for (std::size_t j = 0; j < truth.samples.cols(); ++j) truth.samples(i, j) += shift;
    }
    const auto thetas = kmeans_glasso(truth.samples, 2, kBenchLambda1, 1);
    CHECK(align_and_score(thetas, truth.thetas_true).mean_f1 >= 0.9);
}

TEST_CASE("kmeans glasso with one cluster equals the pooled glasso") {
    std::mt19937_64 gen(29);
    std::normal_distribution<double> normal;
    Matrix x(150, 2);
    for (std::size_t i = 0; i < 150; ++i) {
        x(i, 0) = normal(gen);
        x(i, 1) = 0.6 * x(i, 0) + 0.8 * normal(gen);
    }
    const auto thetas = kmeans_glasso(x, 1, 2.0, 0);
    REQUIRE(thetas.size() == 1);
    // Cluster centering subtracts the sample mean; rebuild the same scatter.
    std::vector<double> mean(2, 0.0);
    for (std::size_t i = 0; i < 150; ++i)
        for (std::size_t j = 0; j < 2; ++j) mean[j] += x(i, j);
    for (double& m : mean) m /= 150.0;
    std::vector<double> s(4, 0.0);
    for (std::size_t i = 0; i < 150; ++i)
        for (std::size_t a = 0; a < 2; ++a)
            for (std::size_t b = a; b < 2; ++b)
                s[a * 2 + b] += (x(i, a) - mean[a]) * (x(i, b) - mean[b]);
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = a; b < 2; ++b) {
            s[a * 2 + b] /= 150.0;
            s[b * 2 + a] = s[a * 2 + b];
        }
    const GlassoSolution direct = solve_weighted_glasso(
        SymMatrix::adopt_unchecked(2, std::move(s)),
        PenaltyMatrix::uniform_offdiag(2, 2.0 * 2.0 / 150.0));
    CHECK(max_abs_diff(thetas[0], direct.theta) < 1e-12);
}

TEST_CASE("kmeans glasso rejects single-member clusters") {
    Matrix x(3, 2);
    x(2, 0) = 100.0;
    x(2, 1) = 100.0;
    CHECK_THROWS_AS(kmeans_glasso(x, 2, 1.0, 0), DegenerateComponent);
}

TEST_CASE("spectral partition recovers disconnected blocks") {
    SymMatrix theta = SymMatrix::identity(6);
    for (std::size_t i = 0; i < 6; ++i) theta.set(i, i, 2.0);
    theta.set(0, 1, 0.8);
    theta.set(1, 2, -0.6);
    theta.set(3, 4, 0.7);
    theta.set(4, 5, 0.5);
    const std::vector<std::size_t> labels = spectral_partition(theta, 2);
    CHECK(labels[0] == labels[1]);
    CHECK(labels[1] == labels[2]);
    CHECK(labels[3] == labels[4]);
    CHECK(labels[4] == labels[5]);
    CHECK(labels[0] != labels[3]);

    const auto subs = restrict_to_partition(theta, labels, 2);
    REQUIRE(subs.size() == 2);
    CHECK(mer_value(subs) == 0.0);
    // Each block reproduced by exactly one sub-network, diagonals kept.
    const EdgeSet first = support(subs[0]);
    const EdgeSet second = support(subs[1]);
    CHECK(first.edges.size() + second.edges.size() == 4);
    for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t a = 0; a < 6; ++a) CHECK(subs[k](a, a) == 2.0);
}

TEST_CASE("glasso spectral with one cluster returns the pooled fit") {
    std::mt19937_64 gen(31);
    std::normal_distribution<double> normal;
    Matrix x(200, 3);
    for (std::size_t i = 0; i < 200; ++i) {
        x(i, 0) = normal(gen);
        x(i, 1) = 0.5 * x(i, 0) + std::sqrt(0.75) * normal(gen);
        x(i, 2) = normal(gen);
    }
    const auto subs = glasso_spectral(x, 1, 2.0);
    REQUIRE(subs.size() == 1);
    std::vector<double> s(9, 0.0);
    for (std::size_t i = 0; i < 200; ++i)
        for (std::size_t a = 0; a < 3; ++a)
            for (std::size_t b = a; b < 3; ++b) s[a * 3 + b] += x(i, a) * x(i, b);
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = a; b < 3; ++b) {
            s[a * 3 + b] /= 200.0;
            s[b * 3 + a] = s[a * 3 + b];
        }
    const GlassoSolution direct = solve_weighted_glasso(
        SymMatrix::adopt_unchecked(3, std::move(s)),
        PenaltyMatrix::uniform_offdiag(3, 2.0 * 2.0 / 200.0));
    CHECK(max_abs_diff(subs[0], direct.theta) < 1e-12);
}

TEST_CASE("complete uniform graph splits into disjoint sub-networks") {
    SymMatrix theta(4);
    for (std::size_t i = 0; i < 4; ++i) theta.set(i, i, 3.0);
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = a + 1; b < 4; ++b) theta.set(a, b, 0.5);
    const std::vector<std::size_t> labels = spectral_partition(theta, 2);
    const auto subs = restrict_to_partition(theta, labels, 2);
    CHECK(mer_value(subs) == 0.0);
    // Any balanced cut is optimal; only the structural postcondition holds.
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = a + 1; b < 4; ++b)
            if (labels[a] != labels[b]) {
                CHECK(subs[0](a, b) == 0.0);
                CHECK(subs[1](a, b) == 0.0);
            }
    // Deterministic across calls.
    CHECK(spectral_partition(theta, 2) == labels);
}

TEST_CASE("spectral handles isolated nodes") {
    SymMatrix theta = SymMatrix::identity(4);
    theta.set(0, 1, 0.5);  // nodes 2 and 3 are isolated
    const std::vector<std::size_t> labels = spectral_partition(theta, 2);
    CHECK(labels.size() == 4);
    CHECK_THROWS_AS(glasso_spectral(Matrix(10, 2, 1.0), 3, 0.1), InvalidInput);
}

TEST_CASE("jgl_like matches fit with the exclusivity term off") {
    SynthSpec spec = scenario(1, 200);
    spec.seed = 2;
    const GroundTruth truth = sample(spec);
    FitConfig cfg;
    cfg.components = 2;
    cfg.lambda1 = 10.0;
    cfg.lambda2 = 0.0;
    cfg.seed = 4;
    const FitResult direct = fit(truth.samples, cfg);
    const FitResult wrapped = jgl_like(truth.samples, 2, 10.0, 4, cfg);
    for (std::size_t c = 0; c < 2; ++c)
        CHECK(direct.model.thetas[c] == wrapped.model.thetas[c]);
}
