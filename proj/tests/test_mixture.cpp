#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <random>

#include "mgl/baselines.hpp"
#include "mgl/mixture.hpp"
#include "mgl/synth.hpp"
#include "helpers.hpp"

using namespace mgl;

namespace {

Matrix gaussian_samples(std::size_t n, std::size_t d, std::uint64_t seed,
                        double correlation = 0.0) {
    // Pairwise-correlated coordinates via a fixed 2x2 mixing of consecutive
    // columns; plain driver data for mixture tests.
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal;
    Matrix x(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) x(i, j) = normal(gen);
        if (correlation != 0.0 && d >= 2) {
            const double z = x(i, 0);
            x(i, 1) = correlation * z + std::sqrt(1.0 - correlation * correlation) * x(i, 1);
        }
    }
    return x;
}

}  // namespace

TEST_CASE("log_density worked values") {
    {
        const SymMatrix theta = SymMatrix::identity(2);
        const auto f = cholesky_or_throw(theta);
        const double x[2] = {0.0, 0.0};
        CHECK_THAT(log_density({x, 2}, theta, f),
                   Catch::Matchers::WithinAbs(-std::log(2.0 * 3.14159265358979323846), 1e-14));
        const double y[2] = {1.0, 0.0};
        CHECK_THAT(log_density({y, 2}, theta, f),
                   Catch::Matchers::WithinAbs(-std::log(2.0 * 3.14159265358979323846) - 0.5,
                                              1e-14));
    }
    {
        SymMatrix theta(2);
        theta.set(0, 0, 2.0);
        theta.set(1, 1, 2.0);
        theta.set(0, 1, -1.0);
        const auto f = cholesky_or_throw(theta);
        const double x[2] = {1.0, 1.0};
        const double expected = 0.5 * std::log(3.0) - std::log(2.0 * 3.14159265358979323846) - 1.0;
        CHECK_THAT(log_density({x, 2}, theta, f), Catch::Matchers::WithinAbs(expected, 1e-14));
    }
}

TEST_CASE("e_step with identical components returns the prior") {
    const Matrix x = gaussian_samples(40, 3, 1);
    MixtureModel model;
    model.thetas = {SymMatrix::identity(3), SymMatrix::identity(3)};

    model.phi = {0.5, 0.5};
    EStepResult even = e_step(x, model);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        CHECK_THAT(even.responsibilities(i, 0), Catch::Matchers::WithinAbs(0.5, 1e-12));
        CHECK_THAT(even.responsibilities(i, 1), Catch::Matchers::WithinAbs(0.5, 1e-12));
    }

    model.phi = {0.9, 0.1};
    EStepResult skew = e_step(x, model);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        CHECK_THAT(skew.responsibilities(i, 0), Catch::Matchers::WithinAbs(0.9, 1e-12));
        CHECK_THAT(skew.responsibilities(i, 1), Catch::Matchers::WithinAbs(0.1, 1e-12));
    }
}

TEST_CASE("e_step density ratio in one dimension") {
    Matrix x(1, 1);
    x(0, 0) = 0.0;
    MixtureModel model;
    model.phi = {0.5, 0.5};
    model.thetas = {SymMatrix::diagonal({1.0}), SymMatrix::diagonal({1.0 / 9.0})};
    const EStepResult e = e_step(x, model);
    CHECK_THAT(e.responsibilities(0, 0), Catch::Matchers::WithinAbs(0.75, 1e-12));
    CHECK_THAT(e.responsibilities(0, 1), Catch::Matchers::WithinAbs(0.25, 1e-12));
}

TEST_CASE("e_step responsibilities always sum to one") {
    std::mt19937_64 gen(3);
    for (int rep = 0; rep < 5; ++rep) {
        const std::size_t d = 2 + rep;
        const Matrix x = gaussian_samples(30, d, 100 + rep);
        MixtureModel model;
        model.phi = {0.2, 0.5, 0.3};
        model.thetas = {testutil::random_spd(d, gen), testutil::random_spd(d, gen),
                        testutil::random_spd(d, gen)};
        const EStepResult e = e_step(x, model);
        for (std::size_t i = 0; i < x.rows(); ++i) {
            double sum = 0.0;
            for (std::size_t c = 0; c < 3; ++c) {
                const double r = e.responsibilities(i, c);
                CHECK(r >= 0.0);
                CHECK(r <= 1.0);
                sum += r;
            }
            CHECK_THAT(sum, Catch::Matchers::WithinAbs(1.0, 1e-10));
        }
        CHECK(std::isfinite(e.nll));
    }
}

TEST_CASE("mer_value worked values") {
    SymMatrix a(2), b(2);
    a.set(0, 0, 1.0);
    a.set(1, 1, 1.0);
    a.set(0, 1, 0.5);
    b = a;
    CHECK_THAT(mer_value({a, b}), Catch::Matchers::WithinAbs(1.0, 1e-12));

    SymMatrix c(3), d(3);
    c.set(0, 1, 0.7);
    d.set(1, 2, -0.4);  // disjoint off-diagonal supports
    CHECK(mer_value({c, d}) == 0.0);

    CHECK(mer_value({a}) == 0.0);
}

TEST_CASE("penalized objective reduces to the NLL and matches a straight-line oracle") {
    const Matrix x = gaussian_samples(12, 2, 5, 0.4);
    MixtureModel model;
    model.phi = {0.6, 0.4};
    SymMatrix t1(2), t2(2);
    t1.set(0, 0, 1.5);
    t1.set(1, 1, 1.2);
    t1.set(0, 1, 0.3);
    t2.set(0, 0, 0.8);
    t2.set(1, 1, 2.0);
    t2.set(0, 1, -0.5);
    model.thetas = {t1, t2};

    const double nll = e_step(x, model).nll;
    CHECK_THAT(penalized_objective(x, model, 0.0, 0.0), Catch::Matchers::WithinAbs(nll, 1e-12));

    // Straight-line reimplementation with scalar arithmetic only.
    double oracle_nll = 0.0;
    const double two_pi = 2.0 * 3.14159265358979323846;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double mixture = 0.0;
        const double x0 = x(i, 0), x1 = x(i, 1);
        {
            const double det = 1.5 * 1.2 - 0.3 * 0.3;
            const double quad = 1.5 * x0 * x0 + 2.0 * 0.3 * x0 * x1 + 1.2 * x1 * x1;
            mixture += 0.6 * std::sqrt(det) / two_pi * std::exp(-0.5 * quad);
        }
        {
            const double det = 0.8 * 2.0 - 0.5 * 0.5;
            const double quad = 0.8 * x0 * x0 - 2.0 * 0.5 * x0 * x1 + 2.0 * x1 * x1;
            mixture += 0.4 * std::sqrt(det) / two_pi * std::exp(-0.5 * quad);
        }
        oracle_nll -= std::log(mixture);
    }
    const double lambda1 = 0.7, lambda2 = 1.3;
    const double oracle_penalty =
        lambda1 * (2.0 * 0.3 + 2.0 * 0.5) + lambda2 * (2.0 * (0.3 * 0.5 + 0.3 * 0.5));
    CHECK_THAT(penalized_objective(x, model, lambda1, lambda2),
               Catch::Matchers::WithinAbs(oracle_nll + oracle_penalty, 1e-9));

    // With a single component the exclusivity term contributes nothing.
    MixtureModel single;
    single.phi = {1.0};
    single.thetas = {t1};
    CHECK_THAT(penalized_objective(x, single, 0.0, 42.0),
               Catch::Matchers::WithinAbs(e_step(x, single).nll, 1e-12));
}

TEST_CASE("m_step with one component equals a plain weighted glasso") {
    const Matrix x = gaussian_samples(80, 3, 7, 0.5);
    Matrix r(80, 1, 1.0);
    MixtureModel model;
    model.phi = {1.0};
    model.thetas = {SymMatrix::identity(3)};
    FitConfig cfg;
    cfg.components = 1;
    cfg.lambda1 = 4.0;
    cfg.lambda2 = 123.0;  // no pair terms with K = 1

    const MixtureModel next = m_step(x, r, model, cfg);

    std::vector<double> s(9, 0.0);
    for (std::size_t i = 0; i < 80; ++i)
        for (std::size_t a = 0; a < 3; ++a)
            for (std::size_t b = a; b < 3; ++b) s[a * 3 + b] += x(i, a) * x(i, b);
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = a; b < 3; ++b) {
            s[a * 3 + b] /= 80.0;
            s[b * 3 + a] = s[a * 3 + b];
        }
    const SymMatrix scatter = SymMatrix::adopt_unchecked(3, std::move(s));
    const PrecisionMatrix init = SymMatrix::identity(3);
    const GlassoSolution direct = solve_weighted_glasso(
        scatter, PenaltyMatrix::uniform_offdiag(3, 2.0 * 4.0 / 80.0), &init, cfg.solver);
    CHECK(max_abs_diff(next.thetas[0], direct.theta) == 0.0);  // identical code path
    CHECK(next.phi[0] == 1.0);
}

TEST_CASE("m_step with lambda2 zero decouples the components") {
    const Matrix x = gaussian_samples(60, 2, 9, 0.3);
    Matrix r(60, 2);
    std::mt19937_64 gen(13);
    std::uniform_real_distribution<double> unif(0.05, 0.95);
    for (std::size_t i = 0; i < 60; ++i) {
        const double p = unif(gen);
        r(i, 0) = p;
        r(i, 1) = 1.0 - p;
    }
    MixtureModel model;
    model.phi = {0.5, 0.5};
    model.thetas = {SymMatrix::identity(2), SymMatrix::identity(2)};
    FitConfig cfg;
    cfg.components = 2;
    cfg.lambda1 = 2.0;
    cfg.lambda2 = 0.0;

    const MixtureModel next = m_step(x, r, model, cfg);

    for (std::size_t c = 0; c < 2; ++c) {
        double mass = 0.0;
        std::vector<double> s(4, 0.0);
        for (std::size_t i = 0; i < 60; ++i) {
            mass += r(i, c);
            for (std::size_t a = 0; a < 2; ++a)
                for (std::size_t b = a; b < 2; ++b) s[a * 2 + b] += r(i, c) * x(i, a) * x(i, b);
        }
        for (std::size_t a = 0; a < 2; ++a)
            for (std::size_t b = a; b < 2; ++b) {
                s[a * 2 + b] /= mass;
                s[b * 2 + a] = s[a * 2 + b];
            }
        const SymMatrix scatter = SymMatrix::adopt_unchecked(2, std::move(s));
        const PrecisionMatrix init = SymMatrix::identity(2);
        const GlassoSolution direct = solve_weighted_glasso(
            scatter, PenaltyMatrix::uniform_offdiag(2, 2.0 * 2.0 / mass), &init, cfg.solver);
        CHECK(max_abs_diff(next.thetas[c], direct.theta) == 0.0);
        CHECK_THAT(next.phi[c], Catch::Matchers::WithinAbs(mass / 60.0, 1e-12));
    }
}

TEST_CASE("huge exclusivity leaves at most one component with the shared edge") {
    const Matrix x = gaussian_samples(40, 2, 21, 0.6);
    Matrix r(40, 2, 0.5);
    MixtureModel model;
    model.phi = {0.5, 0.5};
    model.thetas = {SymMatrix::identity(2), SymMatrix::identity(2)};
    FitConfig cfg;
    cfg.components = 2;
    cfg.lambda1 = 1.0;

    // Baseline: without coupling both components keep the edge.
    cfg.lambda2 = 0.0;
    const MixtureModel free_fit = m_step(x, r, model, cfg);
    CHECK(std::abs(free_fit.thetas[0](0, 1)) > 1e-4);
    CHECK(std::abs(free_fit.thetas[1](0, 1)) > 1e-4);

    cfg.lambda2 = 1e6;
    const MixtureModel tied = m_step(x, r, model, cfg);
    const bool first = std::abs(tied.thetas[0](0, 1)) > 1e-4;
    const bool second = std::abs(tied.thetas[1](0, 1)) > 1e-4;
    CHECK_FALSE((first && second));

    // Independent check that the exclusive support is what Eq.-level grid
    // minimization of the full objective prefers: scan both off-diagonals
    // over a coarse SPD grid with everything else near the fitted values.
    double best = std::numeric_limits<double>::infinity();
    double best12_a = 0.0, best12_b = 0.0;
    const double lambda1 = 1.0, lambda2 = 1e6;
    for (double ta = -0.75; ta <= 0.75; ta += 0.125)
        for (double tb = -0.75; tb <= 0.75; tb += 0.125) {
            MixtureModel cand = tied;
            cand.thetas[0].set(0, 1, ta);
            cand.thetas[1].set(0, 1, tb);
            if (!cholesky(cand.thetas[0]) || !cholesky(cand.thetas[1])) continue;
            const double obj = penalized_objective(x, cand, lambda1, lambda2);
            if (obj < best) {
                best = obj;
                best12_a = ta;
                best12_b = tb;
            }
        }
    CHECK(std::min(std::abs(best12_a), std::abs(best12_b)) < 1e-12);
}

TEST_CASE("m_step detects collapsed components") {
    const Matrix x = gaussian_samples(30, 3, 33);
    Matrix r(30, 2);
    for (std::size_t i = 0; i < 30; ++i) {
        r(i, 0) = 1.0;
        r(i, 1) = 0.0;
    }
    MixtureModel model;
    model.phi = {0.5, 0.5};
    model.thetas = {SymMatrix::identity(3), SymMatrix::identity(3)};
    FitConfig cfg;
    cfg.components = 2;
    try {
        m_step(x, r, model, cfg);
        FAIL("expected DegenerateComponent");
    } catch (const DegenerateComponent& e) {
        CHECK(e.component == 1);
    }
}

TEST_CASE("initialization follows the 0.9 / 0.1 scheme") {
    const Matrix x = gaussian_samples(50, 3, 41);

    FitConfig cfg;
    cfg.components = 2;
    cfg.lambda1 = 1.0;
    cfg.seed = 5;
    const FitResult init2 = initialize(x, cfg);
    for (std::size_t i = 0; i < 50; ++i) {
        const double a = init2.responsibilities(i, 0);
        const double b = init2.responsibilities(i, 1);
        const bool first = a == 0.9 && b == 0.1;
        const bool second = b == 0.9 && a == 0.1;
        CHECK((first || second));
    }

    cfg.components = 4;
    const FitResult init4 = initialize(x, cfg);
    for (std::size_t i = 0; i < 50; ++i) {
        std::size_t big = 0;
        for (std::size_t c = 0; c < 4; ++c) {
            if (init4.responsibilities(i, c) == 0.9)
                ++big;
            else
                CHECK_THAT(init4.responsibilities(i, c),
                           Catch::Matchers::WithinAbs(0.1 / 3.0, 1e-15));
        }
        CHECK(big == 1);
    }
    for (double p : init4.model.phi) CHECK(p == 0.25);

    // All components start from the same whole-sample glasso solution.
    for (std::size_t c = 1; c < 4; ++c)
        CHECK(max_abs_diff(init4.model.thetas[c], init4.model.thetas[0]) == 0.0);

    // Deterministic given the seed.
    const FitResult again = initialize(x, cfg);
    CHECK(again.responsibilities == init4.responsibilities);

    cfg.components = 51;
    CHECK_THROWS_AS(initialize(x, cfg), InvalidInput);
}

TEST_CASE("fit with one component equals a plain glasso") {
    const Matrix x = gaussian_samples(100, 3, 43, 0.4);
    FitConfig cfg;
    cfg.components = 1;
    cfg.lambda1 = 3.0;
    cfg.lambda2 = 0.0;
    cfg.solver.tol = 1e-8;
    cfg.solver.max_iter = 2000;
    const FitResult result = fit(x, cfg);
    CHECK(result.model.phi[0] == 1.0);

    std::vector<double> s(9, 0.0);
    for (std::size_t i = 0; i < 100; ++i)
        for (std::size_t a = 0; a < 3; ++a)
            for (std::size_t b = a; b < 3; ++b) s[a * 3 + b] += x(i, a) * x(i, b);
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = a; b < 3; ++b) {
            s[a * 3 + b] /= 100.0;
            s[b * 3 + a] = s[a * 3 + b];
        }
    const GlassoSolution direct = solve_weighted_glasso(
        SymMatrix::adopt_unchecked(3, std::move(s)),
        PenaltyMatrix::uniform_offdiag(3, 2.0 * 3.0 / 100.0), nullptr, cfg.solver);
    CHECK(max_abs_diff(result.model.thetas[0], direct.theta) < 1e-6);
}

TEST_CASE("fit trace objective is non-increasing") {
    const Matrix x = gaussian_samples(120, 4, 47, 0.5);
    for (std::uint64_t seed : {0ull, 1ull, 2ull}) {
        FitConfig cfg;
        cfg.components = 2;
        cfg.lambda1 = 2.0;
        cfg.lambda2 = 5.0;
        cfg.seed = seed;
        const FitResult result = fit(x, cfg);
        REQUIRE(!result.trace.entries.empty());
        for (std::size_t i = 1; i < result.trace.entries.size(); ++i)
            CHECK(result.trace.entries[i].objective <=
                  result.trace.entries[i - 1].objective + 1e-8);
        for (std::size_t i = 0; i < result.responsibilities.rows(); ++i) {
            double sum = 0.0;
            for (std::size_t c = 0; c < 2; ++c) sum += result.responsibilities(i, c);
            CHECK_THAT(sum, Catch::Matchers::WithinAbs(1.0, 1e-10));
        }
    }
}

TEST_CASE("spherical data gives near-identical components") {
    double worst_rel = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Matrix x = gaussian_samples(600, 3, 1000 + seed);
        FitConfig cfg;
        cfg.components = 2;
        cfg.lambda1 = 2.0;
        cfg.lambda2 = 0.0;
        cfg.seed = seed;
        const FitResult two = fit(x, cfg);
        CHECK(max_abs_diff(two.model.thetas[0], two.model.thetas[1]) < 0.25);

        FitConfig one = cfg;
        one.components = 1;
        const FitResult single = fit(x, one);
        const double obj2 = two.trace.entries.back().objective;
        const double obj1 = single.trace.entries.back().objective;
        worst_rel = std::max(worst_rel, std::abs(obj2 - obj1) / std::abs(obj1));
    }
    CHECK(worst_rel < 0.01);
}

TEST_CASE("fit with lambda2 zero is bit-identical to jgl_like") {
    const Matrix x = gaussian_samples(90, 3, 51, 0.3);
    FitConfig cfg;
    cfg.components = 2;
    cfg.lambda1 = 2.5;
    cfg.lambda2 = 0.0;
    cfg.seed = 9;
    const FitResult direct = fit(x, cfg);
    const FitResult wrapped = jgl_like(x, 2, 2.5, 9, cfg);
    REQUIRE(direct.model.components() == wrapped.model.components());
    for (std::size_t c = 0; c < 2; ++c) {
        CHECK(direct.model.phi[c] == wrapped.model.phi[c]);
        CHECK(direct.model.thetas[c] == wrapped.model.thetas[c]);
    }
    CHECK(direct.responsibilities == wrapped.responsibilities);
}

TEST_CASE("label permutation equivariance with decoupled components") {
    const Matrix x = gaussian_samples(75, 3, 53, 0.4);
    std::mt19937_64 gen(55);
    std::vector<std::size_t> labels(75);
    for (auto& l : labels) l = gen() % 3;
    std::vector<std::size_t> swapped(labels);  // permutation (0 1 2) -> (2 0 1)
    for (auto& l : swapped) l = (l + 2) % 3;

    FitConfig cfg;
    cfg.components = 3;
    cfg.lambda1 = 1.5;
    cfg.lambda2 = 0.0;
    const FitResult base = fit_from_labels(x, cfg, labels);
    const FitResult perm = fit_from_labels(x, cfg, swapped);
    for (std::size_t c = 0; c < 3; ++c) {
        const std::size_t pc = (c + 2) % 3;
        CHECK_THAT(perm.model.phi[pc], Catch::Matchers::WithinAbs(base.model.phi[c], 1e-9));
        CHECK(max_abs_diff(perm.model.thetas[pc], base.model.thetas[c]) < 1e-9);
    }
}

TEST_CASE("scenario-style fit recovers the ground truth support") {
    SynthSpec spec = scenario(1, 500);
    spec.seed = 1;
    const GroundTruth truth = sample(spec);
    FitConfig cfg;
    cfg.components = 2;
    cfg.lambda1 = kBenchLambda1;
    cfg.lambda2 = kBenchLambda2;
    cfg.em_tol = kBenchEmTol;
    cfg.seed = 1;
    const FitResult result = fit(truth.samples, cfg);
    const EvalReport report = align_and_score(result.model.thetas, truth.thetas_true);
    CHECK(report.mean_f1 >= 0.9);
}

TEST_CASE("model validation catches broken invariants") {
    MixtureModel model;
    model.phi = {0.5, 0.6};
    model.thetas = {SymMatrix::identity(2), SymMatrix::identity(2)};
    CHECK_THROWS_AS(validate_model(model), InvalidInput);  // weights exceed 1

    model.phi = {0.5, 0.5};
    SymMatrix bad(2);
    bad.set(0, 0, 1.0);
    bad.set(0, 1, 2.0);
    bad.set(1, 1, 1.0);
    model.thetas = {SymMatrix::identity(2), bad};
    CHECK_THROWS_AS(validate_model(model), InvalidInput);  // not positive definite
}
