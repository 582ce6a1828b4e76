#include "ifsconj/errors.hpp"
#include "ifsconj/linearization.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace ifsconj;

namespace {

IfsDescriptor linear_ifs(std::vector<double> slopes) {
    std::vector<ScalarMap> maps;
    for (double k : slopes) maps.push_back(ScalarMap::linear(k));
    return IfsDescriptor(std::move(maps));
}

// Direct product of slopes along the prefix, in log space.
double log_product(const std::vector<double>& slopes, const SymbolSequence& s, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 1; i <= n; ++i) acc += std::log(std::abs(slopes[static_cast<std::size_t>(s.at(i)) - 1]));
    return acc;
}

}  // namespace

TEST_SUITE("linearization") {
    TEST_CASE("linear_part reads slopes at the origin") {
        std::vector<ScalarMap> maps{ScalarMap::rational_bump(0.5, 0.1), ScalarMap::linear(0.25)};
        const LinearPartResult r = linear_part(IfsDescriptor(maps));
        REQUIRE(r.slopes.size() == 2);
        CHECK(r.slopes[0] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(r.slopes[1] == 0.25);
        CHECK(r.hg_case == LinearizationCase::SameInterval);
        CHECK(r.linear_part.linear_slopes() == r.slopes);

        CHECK(linear_part(linear_ifs({0.5, 2.0})).hg_case == LinearizationCase::MixedRatio);
        CHECK(linear_part(linear_ifs({-0.5, -2.0})).hg_case == LinearizationCase::MixedRatio);
        CHECK(linear_part(linear_ifs({0.5, -0.5})).hg_case == LinearizationCase::Inapplicable);
        CHECK(to_string(LinearizationCase::SameInterval) == "case1");
        CHECK(to_string(LinearizationCase::MixedRatio) == "case2");
    }

    TEST_CASE("linear_part is idempotent on linear IFSs") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(0.05, 0.95);
        for (int t = 0; t < 50; ++t) {
            const IfsDescriptor f = linear_ifs({u(rng), u(rng), 1.0 / u(rng)});
            const LinearPartResult once = linear_part(f);
            CHECK(once.slopes == f.linear_slopes());
            CHECK(linear_part(once.linear_part).slopes == once.slopes);
        }
    }

    TEST_CASE("linear_part hypotheses") {
        CHECK_THROWS_AS(linear_part(linear_ifs({1.0, 0.5})), NonHyperbolicError);
        std::vector<ScalarMap> shifted{ScalarMap::affine(0.5, 0.1)};
        CHECK_THROWS_AS(linear_part(IfsDescriptor(shifted)), HypothesisError);
        // slope exactly 1 at the origin with a nonlinear part
        std::vector<ScalarMap> cubicish{ScalarMap::perturbed(0.9, Perturbation::rational(0.1))};
        CHECK_THROWS_AS(linear_part(IfsDescriptor(cubicish)), NonHyperbolicError);
    }

    TEST_CASE("Koenigs linearization of a linear map is the identity") {
        const Homeomorphism1D h = koenigs_conjugacy(ScalarMap::linear(0.5));
        for (double x = -0.5; x <= 0.5; x += 0.01) CHECK(h(x) == doctest::Approx(x).epsilon(1e-12));
    }

    TEST_CASE("Koenigs linearization of catalog maps") {
        const std::vector<ScalarMap> catalog{
            ScalarMap::rational_bump(0.5, 0.1),
            ScalarMap::perturbed(0.5, Perturbation::sine(0.2)),
            ScalarMap::perturbed(-0.4, Perturbation::rational(0.3)),
            ScalarMap::rational_bump(0.3, 0.2),
            ScalarMap::rational_bump(2.0, 0.3),
            ScalarMap::perturbed(3.0, Perturbation::sine(0.5)),
        };
        for (const auto& f : catalog) {
            const Homeomorphism1D h = koenigs_conjugacy(f);
            CHECK(h(0.0) == 0.0);
            const KoenigsResidual r = koenigs_residual(f, h, 0.5, 2048);
            CHECK(r.checked > 100);
            CHECK_MESSAGE(r.sup <= 1e-6, f.describe() << " sup=" << r.sup);
            double prev = -1e300;
            for (double x : Interval::symmetric(0.5).grid(2048)) {
                const double v = h(x);
                CHECK(v > prev);
                prev = v;
            }
        }
    }

    TEST_CASE("Koenigs hypotheses") {
        CHECK_THROWS_AS(koenigs_conjugacy(ScalarMap::affine(0.5, 0.2)), HypothesisError);
        CHECK_THROWS_AS(koenigs_conjugacy(ScalarMap::perturbed(0.9, Perturbation::rational(0.1))), NonHyperbolicError);
    }

    TEST_CASE("decay bound reference case") {
        std::vector<ScalarMap> maps{ScalarMap::perturbed(0.5, Perturbation::sine(0.1)),
                                    ScalarMap::perturbed(0.3, Perturbation::rational(0.1))};
        const IfsDescriptor f(maps);
        const DecayCheck d = decay_bound_check(f, SymbolSequence::bernoulli(0.5, 7), 20, 5.0);
        CHECK(d.rate == doctest::Approx(0.6));
        CHECK(d.bound == doctest::Approx(std::pow(0.6, 20) * 5.0));
        CHECK(d.holds);

        const DecayCheck zero = decay_bound_check(f, SymbolSequence::bernoulli(0.5, 7), 20, 0.0);
        CHECK(zero.orbit_value == 0.0);
        CHECK(zero.bound == 0.0);
        CHECK(zero.holds);

        std::vector<ScalarMap> loose{ScalarMap::perturbed(0.9, Perturbation::sine(0.2))};
        CHECK_THROWS_AS(decay_bound_check(IfsDescriptor(loose), SymbolSequence::periodic({1}), 5, 1.0),
                        HypothesisError);
        CHECK_THROWS_AS(decay_bound_check(linear_ifs({0.5, -0.5}), SymbolSequence::periodic({1}), 5, 1.0),
                        HypothesisError);
    }

    TEST_CASE("decay bound holds on random samples") {
        std::mt19937_64 rng(2024);
        std::uniform_real_distribution<double> k(0.05, 0.7);
        std::uniform_real_distribution<double> x(-20.0, 20.0);
        std::uniform_int_distribution<std::size_t> n(1, 30);
        int violations = 0;
        for (int t = 0; t < 10000; ++t) {
            const double k1 = k(rng);
            const double k2 = k(rng);
            const double e1 = 0.25 * (1.0 - k1);
            const double e2 = 0.25 * (1.0 - k2);
            std::vector<ScalarMap> maps{ScalarMap::perturbed(k1, Perturbation::sine(e1)),
                                        ScalarMap::perturbed(k2, Perturbation::rational(e2))};
            const SymbolSequence s = SymbolSequence::bernoulli(0.5, static_cast<std::uint64_t>(t));
            if (!decay_bound_check(IfsDescriptor(maps), s, n(rng), x(rng)).holds) ++violations;
        }
        CHECK(violations == 0);
    }

    TEST_CASE("sparse sequences converge, swapped sparse sequences diverge") {
        const IfsDescriptor f = linear_ifs({0.5, 2.0});
        const SequenceFateReport r = classify_sequence_fate(f, SymbolSequence::sparse(2), 400, 1.0, 0.01);
        CHECK(r.predicted_fate == Fate::ConvergesToZero);
        REQUIRE_FALSE(r.trajectory.empty());
        const FateSample& last = r.trajectory.back();
        CHECK(last.n == 400);
        CHECK(last.n1 == 380);
        CHECK(last.n2 == 20);
        // 2^20 * 0.5^380 by hand, in log10
        CHECK(std::log10(last.orbit_g) == doctest::Approx(20 * std::log10(2.0) - 380 * std::log10(2.0)).epsilon(1e-12));
        CHECK(last.orbit_g < 1e-100);

        const SequenceFateReport d = classify_sequence_fate(f, SymbolSequence::sparse(1), 400, 1.0, 0.01);
        CHECK(d.predicted_fate == Fate::Diverges);
        CHECK(d.trajectory.back().orbit_g > 1e100);
    }

    TEST_CASE("periodic and degenerate sequences are undetermined") {
        const IfsDescriptor f = linear_ifs({0.5, 2.0});
        const SequenceFateReport p = classify_sequence_fate(f, SymbolSequence::periodic({1, 2}), 400, 1.0, 0.01);
        CHECK(p.predicted_fate == Fate::Undetermined);
        CHECK(p.lyapunov_sum == doctest::Approx(0.0).epsilon(1e-12));
        for (const auto& s : p.trajectory) CHECK((s.orbit_g == 1.0 || s.orbit_g == 0.5));

        const SequenceFateReport ones =
            classify_sequence_fate(f, SymbolSequence::explicit_symbols(std::vector<int>(50, 1)), 50, 1.0, 0.01);
        CHECK(ones.predicted_fate == Fate::Undetermined);
        CHECK(std::isinf(ones.trajectory.back().ratio));

        CHECK_THROWS_AS(classify_sequence_fate(linear_ifs({0.5, 0.25}), SymbolSequence::periodic({1, 2}), 10, 1.0, 0.01),
                        WrongCaseError);
    }

    TEST_CASE("orbit bound dominates the linear part") {
        const IfsDescriptor f = linear_ifs({0.5, 2.0});
        const SequenceFateReport r = classify_sequence_fate(f, SymbolSequence::bernoulli(0.7, 1), 200, 1.0, 0.01);
        for (const auto& s : r.trajectory) {
            CHECK(s.n1 + s.n2 == s.n);
            CHECK(s.orbit_g <= s.bound * (1.0 + 1e-12));
            CHECK(s.orbit_f == doctest::Approx(s.orbit_g).epsilon(1e-12));
        }
    }

    TEST_CASE("sparse Lyapunov sum sits below the contracting rate") {
        const double eps = 0.01;
        const SequenceFateReport r =
            classify_sequence_fate(linear_ifs({0.5, 2.0}), SymbolSequence::sparse(2), 10000, 1.0, eps);
        CHECK(r.lyapunov_sum < 0.0);
        CHECK(r.lyapunov_sum <= 0.9 * std::log(0.5 + eps) + r.margin);
        CHECK(r.lyapunov_sum == doctest::Approx(log_product({0.5, 2.0}, SymbolSequence::sparse(2), 10000) / 1e4));
    }

    TEST_CASE("Bernoulli Lyapunov sums follow the law of large numbers") {
        const double a1 = 0.5;
        const double a2 = 3.0;
        const std::size_t n = 10000;
        for (double p : {0.2, 0.5, 0.8})
            for (std::uint64_t seed : {1u, 2u, 3u}) {
                const SequenceFateReport r =
                    classify_sequence_fate(linear_ifs({a1, a2}), SymbolSequence::bernoulli(p, seed), n, 1.0, 0.01);
                const double mean = p * std::log(a1) + (1 - p) * std::log(a2);
                const double se = std::sqrt(p * (1 - p)) * std::abs(std::log(a1) - std::log(a2)) / std::sqrt(double(n));
                CHECK(std::abs(r.lyapunov_sum - mean) < 3 * se);
            }
    }

    TEST_CASE("nonlinear maps in the mixed case") {
        std::vector<ScalarMap> maps{ScalarMap::perturbed(0.5, Perturbation::sine(0.05)),
                                    ScalarMap::perturbed(2.0, Perturbation::sine(0.05))};
        const SequenceFateReport r =
            classify_sequence_fate(IfsDescriptor(maps), SymbolSequence::sparse(2), 400, 0.1, 0.1);
        CHECK(r.predicted_fate == Fate::ConvergesToZero);
        CHECK(r.contracting_symbols == std::vector<int>{1});
        CHECK(r.expanding_symbols == std::vector<int>{2});
        CHECK(std::abs(r.trajectory.back().orbit_f) < 1e-30);
    }
}
